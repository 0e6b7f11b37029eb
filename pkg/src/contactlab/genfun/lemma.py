"""Velocities of generating-function families and the min/max sandwich of spectral values."""

from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import DomainError, FamilyEventError, SandwichViolation
from ..flows.lengths import simpson_weights
from .locus import critical_locus, locus_with_fibers
from .spectral import spectral_invariant


@dataclass
class FamilyVelocity:
    """``d/dt S_t`` on the critical locus of ``S_t``.

    Attributes
    ----------
    q, e : sample coordinates on ``Sigma_{S_t}`` (ordered by component)
    labels : component label of each sample
    values : ``d_t S_t`` at the samples
    geometric_gap : largest difference to the finite-difference velocity of
        matched curve points
    checked_fraction : fraction of q-columns where matching was possible
    flagged : True if the gap exceeds the tolerance
    """

    t: float
    q: np.ndarray
    e: np.ndarray
    labels: np.ndarray
    values: np.ndarray
    geometric_gap: float
    checked_fraction: float
    flagged: bool


def _matched_z_velocity(S, t, h, n_q, n_e):
    """Central difference of ``z = S`` along roots matched within each q-column."""
    locs = [critical_locus(S, t + s, n_q, n_e) for s in (-h, 0.0, h)]
    cols = [loc.columns() for loc in locs]
    gaps, checked = [], 0
    for i in range(n_q):
        e_m, e_0, e_p = (loc.e[c[i]] for loc, c in zip(locs, cols))
        if not (len(e_m) == len(e_0) == len(e_p)) or len(e_0) == 0:
            continue
        checked += 1
        q = np.full(len(e_0), locs[1].q[cols[1][i]][0])
        z_p = S.value(q, e_p, t + h)
        z_m = S.value(q, e_m, t - h)
        geo = (z_p - z_m) / (2 * h)
        gaps.append(np.max(np.abs(geo - S.d_t(q, e_0, t))))
    gap = float(max(gaps)) if gaps else np.inf
    return gap, checked / n_q


def family_velocity(S, t, n_q=512, n_e=None, h=1e-4, tol=1e-3):
    """Velocity ``alpha(X)`` of the Legendrian family generated by ``S_t``.

    Returns ``d_t S_t`` on ``Sigma_{S_t}``.  As a check, the roots of
    ``d_e S`` at ``t +- h`` are matched to those at ``t`` within each
    q-column (the closest root in the fiber over the same point) and the
    central difference of their ``z = S`` values is compared with the
    returned values.

    Raises
    ------
    FamilyEventError
        If the number of Legendrian components changes between ``t`` and
        ``t +- h``.
    """
    comps = locus_with_fibers(S, t, n_q, n_e)
    counts = [len(locus_with_fibers(S, t + s, n_q, n_e)) for s in (-h, h)]
    if any(c != len(comps) for c in counts):
        raise FamilyEventError(
            f"component count changes near t={t}: {counts} vs {len(comps)}")
    nodes = np.concatenate(comps)
    labels = np.concatenate([np.full(len(c), k) for k, c in enumerate(comps)])
    q, e = nodes[:, 0], nodes[:, 1:]
    vals = S.d_t(q, e, t)
    gap, frac = _matched_z_velocity(S, t, h, n_q, n_e) if S.m else (0.0, 1.0)
    return FamilyVelocity(t, q, e, labels, vals, gap, frac, bool(gap > tol))


@dataclass
class SandwichReport:
    """Result of :func:`zap_sandwich`; slack values are positive when the sandwich holds."""

    A: str
    int_min: float
    spectral: float
    int_max: float
    tolerance: float
    quadrature_error: float
    curve_error: float
    cell_tol: float
    slack_lower: float
    slack_upper: float
    passed: bool
    n_t: int

    def to_dict(self):
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                for k, v in asdict(self).items()}


def _slice_extrema(S, t, n_q, n_e):
    comps = locus_with_fibers(S, t, n_q, n_e)
    lo, hi, err = np.inf, -np.inf, 0.0
    for nodes in comps:
        v = S.d_t(nodes[:, 0], nodes[:, 1:], t)
        lo, hi = min(lo, v.min()), max(hi, v.max())
        if len(v) > 1:
            err = max(err, 0.5 * float(np.max(np.abs(np.roll(v, -1) - v))))
    return lo, hi, err


def zap_sandwich(S, A="point", n_t=32, n_q=None, n_e=None, spectral_n_q=None, strict=True):
    """Check ``int min d_t S_t <= l(L_1, A) <= int max d_t S_t`` for a family from ``Q``.

    The extrema are taken over the sampled critical loci and integrated
    with Simpson's rule on ``n_t`` intervals.  The tolerance combines the
    Richardson estimate of the quadrature error, the sample-to-curve error
    (half the largest jump of ``d_t S`` between neighbouring samples) and
    twice the cell tolerance of the spectral grid.  The slice grid defaults
    to ``n_q = 512`` (``256 x 31`` fiber samples when ``m = 2``).

    Raises
    ------
    DomainError
        If ``S_0`` is not the bare quadratic form.
    SandwichViolation
        If ``strict`` and the sandwich fails beyond tolerance.
    """
    if n_t % 4:
        raise ValueError("n_t must be a multiple of 4")
    f0 = S.f_bounds(0.0)
    if max(abs(f0[0]), abs(f0[1])) > 1e-12:
        raise DomainError("family must start at the zero section (S_0 = Q)")
    if n_q is None:
        n_q = 256 if S.m == 2 else 512
    if n_e is None and S.m == 2:
        n_e = 31
    times = np.linspace(0.0, 1.0, n_t + 1)
    ext = np.array([_slice_extrema(S, t, n_q, n_e) for t in times])
    w, w2 = simpson_weights(n_t), simpson_weights(n_t // 2)
    int_min, int_max = float(w @ ext[:, 0]), float(w @ ext[:, 1])
    quad = max(abs(int_min - w2 @ ext[::2, 0]), abs(int_max - w2 @ ext[::2, 1])) / 15.0
    curve = float(np.max(ext[:, 2]))
    sv = spectral_invariant(S, A, t=1.0, n_q=spectral_n_q)
    tol = quad + curve + 2.0 * sv.cell_tol
    lo_slack = sv.value - int_min
    hi_slack = int_max - sv.value
    passed = bool(lo_slack >= -tol and hi_slack >= -tol)
    rep = SandwichReport(A, int_min, sv.value, int_max, tol, quad, curve, sv.cell_tol,
                         lo_slack, hi_slack, passed, n_t)
    if strict and not passed:
        raise SandwichViolation(
            f"sandwich violated: {int_min:.6g} <= {sv.value:.6g} <= {int_max:.6g} "
            f"fails beyond tolerance {tol:.3g}")
    return rep

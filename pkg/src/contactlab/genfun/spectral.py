"""Spectral invariants ``l(L, A)`` from sublevel filtrations of generating functions."""

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..exceptions import InfeasibleError, RegularityError
from .homology import cubical_complex, persistence

CLASSES = ("point", "fundamental")
TWO_PI = 2.0 * np.pi


@dataclass
class SpectralValue:
    """Spectral value of one homology class.

    ``lower``/``upper`` bracket the value using the grid one refinement
    level coarser and the cell tolerance of the finer grid.
    """

    A: str
    value: float
    lower: float
    upper: float
    cell_tol: float
    n_q: int
    n_e: int
    a: float
    fiber_radius: tuple
    coarse_value: float = np.nan

    def to_dict(self):
        d = asdict(self)
        d["fiber_radius"] = list(self.fiber_radius)
        return {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in d.items()}


def fiber_radii(S, t=1.0):
    """Fiber box half-widths: beyond the support, and deep enough below ``a``."""
    fmin, fmax = S.f_bounds(t)
    base = max(1.1 * S.support_radius, 1.0)
    radii = []
    for qd in S.q_diag:
        r = base
        if qd < 0:
            # |Q_i| R^2 >= (max f - a) + 1 with a = min f - 1
            r = max(r, np.sqrt((fmax - fmin + 2.0) / abs(qd)))
        radii.append(float(r))
    return tuple(radii)


def default_resolution(m, n_q=None, n_e=None, scale=1.0):
    if n_q is None:
        n_q = {0: 256, 1: 256, 2: 64}[m]
    if n_e is None:
        n_e = {0: 1, 1: 257, 2: 25}[m]
    n_q = max(16, int(round(n_q * scale)))
    if m and n_e > 1:
        n_e = max(9, int(round((n_e - 1) * scale)) + 1)
        n_e += 1 - n_e % 2
    return n_q, n_e


def fiber_axis(S, radius, n_e):
    """Fiber grid: ``n_e`` uniform points across the window holding ``Sigma_S``,
    padded by at most four coarse points per side out to ``radius``.

    Outside the window ``S`` is the bare quadratic form plus a constant, so
    the filtration there needs no resolution.
    """
    inner = min(radius, 1.05 * max(S.support_radius, 1.0))
    core = np.linspace(-inner, inner, n_e)
    if radius <= inner + 1e-12:
        return core
    step = max(core[1] - core[0], (radius - inner) / 4.0)
    k = int(np.ceil((radius - inner) / step - 1e-9))
    outer = inner + (radius - inner) * np.arange(1, k + 1) / k
    return np.concatenate([-outer[::-1], core, outer])


def _grid(S, t, n_q, n_e, radii):
    qs = TWO_PI * np.arange(n_q) / n_q
    axes = [qs] + [fiber_axis(S, r, n_e) for r in radii]
    mesh = np.meshgrid(*axes, indexing="ij")
    q = mesh[0].ravel()
    e = np.stack([g.ravel() for g in mesh[1:]], axis=1) if S.m else np.zeros((len(q), 0))
    return axes, q, e


def _check_boundary(S, t, axes, q, e, radii):
    for i, r in enumerate(radii):
        face = np.isclose(np.abs(e[:, i]), r)
        if np.any(S.d_e(q[face], e[face], t)[:, i] == 0):
            raise RegularityError("d_e S vanishes on the fiber boundary; enlarge the fiber box")


def _shift(arr, shift, axis):
    """Neighbour values along ``axis``: periodic in q, edge-padded in the fibers."""
    out = np.roll(arr, shift, axis=axis)
    if axis:
        edge = [slice(None)] * arr.ndim
        edge[axis] = 0 if shift > 0 else -1
        out[tuple(edge)] = arr[tuple(edge)]
    return out


def _cell_tol(vals, axes, S, q, e, t):
    """Largest edge variation of ``S`` at grid vertices within one cell of ``Sigma_S``.

    A vertex is near the critical locus when, for every fiber direction,
    the values of ``d_e S`` on the vertex and its axis neighbours bracket
    zero.  Far from ``Sigma_S`` the filtration has no critical
    events, so steep regions there do not enter the tolerance.
    """
    def edge_var(axis):
        if axis == 0:
            return np.abs(np.roll(vals, -1, axis=0) - vals)
        d = np.abs(np.diff(vals, axis=axis))
        pad = [(0, 0)] * vals.ndim
        pad[axis] = (0, 1)
        return np.pad(d, pad)

    var = edge_var(0)
    for k in range(1, vals.ndim):
        var = np.maximum(var, edge_var(k))
    if S.m == 0:
        return float(var.max())
    grad = S.d_e(q, e, t).reshape(vals.shape + (S.m,))
    near = np.ones(vals.shape, bool)
    for i in range(S.m):
        g = grad[..., i]
        lo, hi = g.copy(), g.copy()
        for axis in range(vals.ndim):
            for shift in (-1, 1):
                nb = _shift(g, shift, axis)
                lo, hi = np.minimum(lo, nb), np.maximum(hi, nb)
        near &= (lo <= 0) & (hi >= 0)
    return float(var[near].max()) if np.any(near) else float(var.max())


def _essential(S, t, n_q, n_e):
    radii = fiber_radii(S, t)
    axes, q, e = _grid(S, t, n_q, n_e, radii)
    vals = S.value(q, e, t).reshape([len(ax) for ax in axes])
    if S.m:
        _check_boundary(S, t, axes, q, e, radii)
    inside = np.all(np.abs(e) <= S.support_radius + 1e-12, axis=1) if S.m else np.ones(len(q), bool)
    if not np.any(inside):
        inside = np.all(np.abs(e) <= np.min(np.abs(np.diff(axes[1]))), axis=1)
    a = float(vals.ravel()[inside].min()) - 1.0
    pers = persistence(cubical_complex(vals), a)
    k = S.index
    out = {}
    for A, deg in zip(CLASSES, (k, k + 1)):
        births = pers.essential.get(deg, [])
        if len(births) != 1:
            raise InfeasibleError(
                f"expected one essential class in degree {deg}, found {len(births)}; "
                "the quadratic form is not handled correctly")
        out[A] = float(births[0])
    return out, _cell_tol(vals, axes, S, q, e, t), a, radii


def spectral_values(S, t=1.0, n_q=None, n_e=None, refine=True, grid_scale=1.0):
    """Both spectral values of ``S_t`` from one filtration per grid.

    Returns a dict ``{'point': SpectralValue, 'fundamental': SpectralValue}``.
    """
    n_q, n_e = default_resolution(S.m, n_q, n_e, grid_scale)
    fine, tol, a, radii = _essential(S, t, n_q, n_e)
    coarse = None
    if refine:
        cq = max(8, n_q // 2)
        ce = (n_e - 1) // 2 + 1 if S.m else n_e
        ce += 1 - ce % 2 if S.m else 0
        coarse = _essential(S, t, cq, ce)[0]
    out = {}
    for A in CLASSES:
        v = fine[A]
        c = coarse[A] if coarse else v
        out[A] = SpectralValue(A, v, min(v, c) - tol, max(v, c) + tol, tol, n_q, n_e, a,
                               radii, c if coarse else np.nan)
    return out


def spectral_invariant(S, A="point", t=1.0, n_q=None, n_e=None, refine=True, grid_scale=1.0):
    """Spectral value ``l(L_S, A)`` for ``A`` in {'point', 'fundamental'}.

    The sublevel filtration of ``S_t`` on a cubical grid over
    ``S^1 x [-R, R]^m`` is taken relative to ``{S < a}`` with ``a`` one unit
    below the grid minimum on the support window.  The point class lives in
    degree ``index(Q)`` and the fundamental class in degree ``index(Q) + 1``;
    the value is the birth of the unique essential class in that degree.

    Examples
    --------
    >>> from contactlab.genfun import jet_genfun
    >>> S = jet_genfun([(1.0, ('cos', 1))])
    >>> spectral_invariant(S, 'point', n_q=64, n_e=33, refine=False).value
    -1.0
    """
    if A not in CLASSES:
        raise ValueError(f"A must be one of {CLASSES}, got {A!r}")
    return spectral_values(S, t, n_q, n_e, refine, grid_scale)[A]


class SpectralInvariant(BaseEstimator):
    """Estimator wrapper: ``fit(S)`` computes both spectral values.

    Attributes
    ----------
    point_, fundamental_ : SpectralValue
    """

    def __init__(self, n_q=None, n_e=None, t=1.0, refine=True):
        self.n_q = n_q
        self.n_e = n_e
        self.t = t
        self.refine = refine

    def fit(self, S, y=None):
        vals = spectral_values(S, self.t, self.n_q, self.n_e, self.refine)
        self.point_ = vals["point"]
        self.fundamental_ = vals["fundamental"]
        return self

    def predict(self, A="point"):
        check_is_fitted(self, "point_")
        return (self.point_ if A == "point" else self.fundamental_).value

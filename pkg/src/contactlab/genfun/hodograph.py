"""Hodograph transform ``ST*R^2 -> J^1 S^1`` and the spectral bound for paths on T3."""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..flows.integrate import flow_map
from ..flows.paths import BasisPath
from ..lorentz import norm_upper, tau_lower
from ..manifolds import ContactModel, ScalarField, extremize
from .functions import GenFun, Term
from .lemma import zap_sandwich
from .locus import legendrian_from_genfun
from .curves import LegendrianCurve
from .spectral import spectral_values

TWO_PI = 2.0 * np.pi
J1S1 = ContactModel("J1S1")


def hodograph(points):
    """``(x1, x2, theta) -> (q, p, z) = (theta, x.u'(theta), x.u(theta))``.

    Examples
    --------
    >>> hodograph([[1.0, 0.0, 0.0]]).tolist()
    [[0.0, 0.0, 1.0]]
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2, th = pts.T
    c, s = np.cos(th), np.sin(th)
    return np.stack([np.mod(th, TWO_PI), -x1 * s + x2 * c, x1 * c + x2 * s], axis=1)


def hodograph_inverse(points):
    """``(q, p, z) -> (z u(q) + p u'(q), q)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    q, p, z = pts.T
    c, s = np.cos(q), np.sin(q)
    return np.stack([z * c - p * s, z * s + p * c, q], axis=1)


def hodograph_jacobian(points):
    """Jacobian of :func:`hodograph`, shape (n, 3, 3)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2, th = pts.T
    c, s = np.cos(th), np.sin(th)
    n = len(pts)
    J = np.zeros((n, 3, 3))
    J[:, 0, 2] = 1.0
    J[:, 1, 0], J[:, 1, 1], J[:, 1, 2] = -s, c, -x1 * c - x2 * s
    J[:, 2, 0], J[:, 2, 1], J[:, 2, 2] = c, s, -x1 * s + x2 * c
    return J


def pullback_residual(points, tangents):
    """Max of ``|(dz - p dq)(dH v) - (cos th dx1 + sin th dx2)(v)|`` over samples."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.atleast_2d(np.asarray(tangents, dtype=float))
    img = hodograph(pts)
    w = np.einsum("nij,nj->ni", hodograph_jacobian(pts), v)
    lhs = w[:, 2] - img[:, 1] * w[:, 0]
    rhs = np.cos(pts[:, 2]) * v[:, 0] + np.sin(pts[:, 2]) * v[:, 1]
    return float(np.max(np.abs(lhs - rhs)))


def origin_fiber(n=512, model=None):
    """Fiber ``{(0, 0, theta)}`` of the unit cotangent bundle over the origin."""
    th = TWO_PI * np.arange(n) / n
    pts = np.column_stack([np.zeros(n), np.zeros(n), th])
    return LegendrianCurve(model or ContactModel("STR2"), pts)


def _time_terms(prof):
    """Antiderivative of a polynomial time profile as (coeff, time-kind) pairs."""
    if prof.kind != "poly" or len(prof.params) > 2:
        return None
    out = [(prof.params[0], "t")]
    if len(prof.params) == 2 and prof.params[1]:
        out.append((0.5 * prof.params[1], "t2"))
    return out


def genfun_for_path(path):
    """Closed-form GF family of the transported origin fiber, or ``None``.

    Supported: paths on T3/STR2 spanned by ``1, cos theta, sin theta`` with
    constant or linear time profiles.  Such a path moves each fiber point by
    ``C(t) u(theta) + V(t)``; after the hodograph the fiber over the origin
    becomes ``j^1(C(t) + V(t).u(q))``, generated by ``e^2 + C + V.u``.
    """
    if not isinstance(path, BasisPath) or path.model.kind not in ("T3", "STR2"):
        return None
    sigma = path.model.sigma
    terms = []
    for coeff, prof, mode in path.terms:
        tt = _time_terms(prof)
        if tt is None:
            return None
        if mode.kind == "const":
            circle = ("one",)
        elif mode.kind == "fourier" and tuple(mode.params[:3]) == (0, 0, 1):
            circle = ("sin", 1) if mode.params[3] else ("cos", 1)
        else:
            return None
        for c, kind in tt:
            if c:
                terms.append(Term(coeff * c / sigma, kind, circle))
    return GenFun([1.0], terms, name="transported-fiber")


def lift_to_str2(path):
    """The same basis Hamiltonian on the universal cover ``ST*R^2``."""
    if not isinstance(path, BasisPath) or path.model.kind not in ("T3", "STR2"):
        raise ValueError("only basis paths on T3 lift in closed form")
    m = path.model
    return BasisPath(ContactModel("STR2", m.sign, m.scale), path.terms)


@dataclass
class Theorem3Report:
    """Comparison of certified bounds for one path on T3."""

    tau_lower: float
    d_upper: float
    C: float
    rho_min: float
    rho_max: float
    l_point: float = np.nan
    l_fundamental: float = np.nan
    cell_tol: float = np.nan
    int_min: float = np.nan
    int_max: float = np.nan
    fiber_gap: float = np.nan
    tolerance: float = 0.0
    checks: dict = field(default_factory=dict)
    partial: bool = True

    @property
    def passed(self):
        return all(self.checks.values())

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in d.items()}


def _rho_bounds(model, rho):
    if rho is None:
        return 1.0, 1.0
    ext = extremize(model, rho)
    if ext.min - ext.min_error <= 0:
        raise ValueError("conformal weight must be positive")
    return float(ext.min), float(ext.max)


def theorem3_check(path, rho=None, *, n_modes=2, max_evals=600, seed=0, tol=1e-6,
                   spectral_n_q=None, n_t=32, family="auto"):
    """Certified ``tau`` lower bound, norm upper bound and spectral sandwich for a T3 path.

    Parameters
    ----------
    path : BasisPath on T3 starting at the identity
    rho : ScalarField, optional
        Positive weight of the form ``rho * alpha``; ``C = max rho / min rho``.
    family : GenFun, 'auto' or None
        GF family generating the transported origin fiber; 'auto' uses
        :func:`genfun_for_path` and ``None`` skips the spectral part.

    The checks recorded are ``tau <= C d``; with a family also the
    sandwich ``int min <= l(pt) <= int max`` along the family,
    ``tau <= max(rho) l(pt)`` and ``l(fund) <= d / min(rho)`` (the
    spectral values bound every path with the same endpoint).
    """
    model = path.model
    if model.kind != "T3" or model.sigma != 1.0:
        raise ValueError("theorem3_check expects a path on T3 with the standard form")
    rmin, rmax = _rho_bounds(model, rho)
    C = rmax / rmin
    tau = tau_lower(model, path, n_modes=n_modes, max_evals=max_evals, seed=seed, rho=rho)
    norm = norm_upper(model, path, n_modes=n_modes, max_evals=max_evals, seed=seed, rho=rho)
    tol_len = tau.error_bound + norm.error_bound + tol
    rep = Theorem3Report(tau.lower_bound, norm.upper_bound, C, rmin, rmax, tolerance=tol_len)
    rep.checks["tau_le_C_d"] = bool(tau.lower_bound <= C * norm.upper_bound + tol_len)
    S = genfun_for_path(path) if isinstance(family, str) and family == "auto" else family
    if S is None:
        return rep
    rep.partial = False
    vals = spectral_values(S, 1.0, spectral_n_q)
    lp, lf = vals["point"], vals["fundamental"]
    rep.l_point, rep.l_fundamental, rep.cell_tol = lp.value, lf.value, lp.cell_tol
    sand = zap_sandwich(S, "point", n_t=n_t, spectral_n_q=spectral_n_q, strict=False)
    rep.int_min, rep.int_max = sand.int_min, sand.int_max
    spec_tol = 2.0 * lp.cell_tol + tol
    rep.checks["sandwich"] = sand.passed
    # a zero lower bound certifies no causal relation, so there is nothing to compare
    rep.checks["tau_le_l_point"] = bool(tau.lower_bound <= 0.0
                                        or tau.lower_bound <= rmax * (lp.value + spec_tol) + tol_len)
    rep.checks["l_fund_le_d"] = bool(lf.value - spec_tol <= norm.upper_bound / rmin + tol_len)
    # the family must describe the transported fiber
    fiber = origin_fiber(256)
    moved = flow_map(lift_to_str2(path), fiber.points)
    image = LegendrianCurve(J1S1, hodograph(moved))
    rep.fiber_gap = float(image.hausdorff(legendrian_from_genfun(S, 1.0, n_q=512)))
    rep.checks["fiber_matches_family"] = bool(rep.fiber_gap <= 2.0 * TWO_PI / 512)
    return rep


def weight_field(amplitude, mode=(1, 0, 0)):
    """Weight ``1 + amplitude cos(k.x)`` on T3 as a ScalarField.

    ``max/min = (1 + amplitude) / (1 - amplitude)``; amplitude ``1/3``
    gives ratio 2.
    """
    k = np.asarray(mode, dtype=float)

    def f(x):
        return 1.0 + amplitude * np.cos(x @ k)

    def g(x):
        return -amplitude * np.sin(x @ k)[:, None] * k[None, :]
    return ScalarField(f, g, lipschitz=abs(amplitude) * float(np.linalg.norm(k)))

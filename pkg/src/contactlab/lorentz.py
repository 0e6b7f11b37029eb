"""
Certified estimates of the Lorentzian distance and the Shelukhin-type norm.

Pairs are always ``(id, phi)`` with ``phi`` the time-one map of a base path,
possibly right-translated; contactomorphisms are compared through their
action on a fixed ensemble of probe points.  Lower bounds for the
Lorentzian distance come from non-negative witness paths with the same
endpoints, upper bounds for the norm from arbitrary witness paths with the
same endpoints.  The search family is

    reeb_reparametrize(lambda o phi)   (optionally concatenated with loops)

where ``lambda`` is a strict loop (base translations on T3/STR2, torus
rotations on S3) so the endpoints never move.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_is_fitted

from .exceptions import CompositionError, RefusalError
from .flows import (ComposedPath, FourierLoop, TorusMotion, TranslationMotion, concatenate,
                    default_grid, flow_map, lorentz_length, reeb_path, reeb_reparametrize,
                    shelukhin_length, simpson_weights)
from .manifolds import GridSpec

DEFAULT_ETA = 1e-5


def probe_points(model, n=64, seed=20240611):
    """Deterministic ensemble of ``n`` points used to compare maps."""
    rng = np.random.default_rng(seed)
    if model.kind in ("T3", "STR2"):
        return rng.uniform(0.0, 2 * np.pi, size=(n, 3))
    if model.kind == "J1S1":
        return np.column_stack([rng.uniform(0, 2 * np.pi, n), rng.uniform(-0.5, 0.5, n),
                                rng.uniform(-1, 1, n)])
    x = rng.normal(size=(n, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def match_residual(model, a, b):
    return float(np.max(model.chart_distance(a, b))) if len(a) else 0.0


@dataclass
class TauEstimate:
    """Certified lower bound for the Lorentzian distance of a pair.

    ``lower_bound = value - error_bound`` where ``value`` is the
    Lorentzian length of ``witness``.  ``margin`` is the smallest sampled
    value of ``min_M H_t`` along the witness.
    """

    lower_bound: float
    value: float
    error_bound: float
    witness: object
    margin: float
    positive: bool
    relation: str
    start: np.ndarray
    end: np.ndarray
    matching_residual: float
    upper_bound: Optional[float] = None
    upper_provenance: str = "unknown"
    loops: int = 0
    seed: Optional[int] = None
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"lower": self.lower_bound, "value": self.value, "error_bound": self.error_bound,
                "margin": self.margin, "positive": self.positive, "relation": self.relation,
                "matching_residual": self.matching_residual,
                "upper": self.upper_bound, "upper_provenance": self.upper_provenance,
                "loops": self.loops, "seed": self.seed}


@dataclass
class NormEstimate:
    """Certified upper bound for the norm (or a distance) of a pair."""

    upper_bound: float
    value: float
    error_bound: float
    witness: object
    start: np.ndarray
    end: np.ndarray
    matching_residual: float
    seed: Optional[int] = None
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"upper": self.upper_bound, "value": self.value,
                "error_bound": self.error_bound,
                "matching_residual": self.matching_residual, "seed": self.seed}


@dataclass
class LoopCertificate:
    """A loop of contactomorphisms with a certified positivity margin."""

    path: object
    margin: float
    k: int
    matching_residual: float
    positive: bool = True

    def to_dict(self):
        return {"margin": self.margin, "k": self.k, "matching_residual": self.matching_residual,
                "positive": self.positive}


@dataclass
class TransportedEstimate:
    """Bracket for an estimate transported to the form ``psi^* alpha``."""

    lower: float
    upper: float
    rho_min: float
    rho_max: float
    source: object

    @property
    def widening(self):
        return self.rho_max / self.rho_min


# -- strict loop families ---------------------------------------------------

def loop_motion(model, coeffs):
    """Strict loop driven by Fourier coefficients, or ``None`` if unavailable."""
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        return None
    c = c.reshape(-1, 2, 2)
    if model.kind in ("T3", "STR2"):
        return TranslationMotion(model, FourierLoop(c))
    if model.kind == "S3":
        return TorusMotion(model, FourierLoop(c))
    return None


def loop_family_size(model, n_modes):
    return 4 * n_modes if model.kind in ("T3", "STR2", "S3") else 0


class _CheapObjective:
    """Grid-only evaluation of per-time extrema for the optimizer."""

    def __init__(self, model, n=10, n_t=16, support_radius=None, rho=None):
        g = default_grid(model, support_radius, n=n)
        nodes, _, _ = g.axes(model)
        mesh = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1).reshape(-1, 3)
        self.points = model.embed(mesh)
        self.times = np.linspace(0.0, 1.0, n_t + 1)
        self.weights = simpson_weights(n_t)
        self.rho = None if rho is None else rho(self.points)

    def extrema(self, path):
        lo = np.empty(len(self.times))
        hi = np.empty(len(self.times))
        for i, t in enumerate(self.times):
            v = path.value(t, self.points)
            if self.rho is not None:
                v = v * self.rho
            tail = path.tail(t)
            if tail is not None:
                v = np.append(v, tail)
            lo[i], hi[i] = v.min(), v.max()
        return lo, hi

    def lorentz(self, path):
        lo, _ = self.extrema(path)
        return float(self.weights @ lo)

    def shelukhin_mid(self, path):
        lo, hi = self.extrema(path)
        return float(self.weights @ (0.5 * (hi - lo)) + abs(self.weights @ (0.5 * (hi + lo))))


def _optimize(objective, dim, rng, max_evals, scale):
    """Seeded Nelder-Mead from the origin; returns (best_x, best_f, n_evals)."""
    x0 = np.zeros(dim)
    simplex = np.vstack([x0, scale * (np.eye(dim) + 0.1 * rng.standard_normal((dim, dim)))])
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"maxfev": max_evals, "initial_simplex": simplex,
                            "xatol": 1e-7, "fatol": 1e-10})
    return np.asarray(res.x), float(res.fun), int(res.nfev)


def _endpoints(path, start_points, steps):
    return flow_map(path, start_points, steps)


def _check_weight(model, path, rho):
    if path.model != model:
        raise ValueError("base path lives on a different model")
    if rho is not None and model.kind == "J1S1":
        raise ValueError("weighted forms are supported on compact models only")


def tau_lower(model, base_path, *, n_modes=2, max_evals=2000, seed=0, loops=(), delta=1e-3,
              grid=None, eta=DEFAULT_ETA, steps=1000, tol=1e-9, probe=None, rho=None):
    """Certified lower bound for ``tau(id, phi)``, ``phi`` the time-one map of ``base_path``.

    Searches ``reeb_reparametrize(lambda o base)`` over strict loops
    ``lambda`` with ``n_modes`` Fourier modes (Nelder-Mead on a cheap grid
    objective, seeded), optionally concatenated with the loops in
    ``loops``.  The best candidate is recertified on the full grid.

    With a positive weight ``rho`` (a ScalarField) all lengths are taken
    for the form ``rho * alpha`` and candidates are not Reeb-equalized.

    Returns
    -------
    TauEstimate
    """
    _check_weight(model, base_path, rho)
    rng = np.random.default_rng(seed)
    P = probe_points(model) if probe is None else probe
    start = base_path.start_map(P)
    target_end = _endpoints(base_path, P, steps)
    history = []

    candidates = [("base", base_path)]
    dim = loop_family_size(model, n_modes)
    if dim and (rho is not None or not base_path.spatially_constant):
        cheap = _CheapObjective(model, support_radius=base_path.support_radius, rho=rho)
        f0 = cheap.lorentz(base_path)
        obj = lambda c: -cheap.lorentz(ComposedPath(loop_motion(model, c), base_path))
        x, fx, nev = _optimize(obj, dim, rng, max_evals, 0.1)
        history.append({"stage": "loop-search", "cheap_start": f0, "cheap_best": -fx,
                        "evals": nev})
        if -fx > f0:
            candidates.append(("loop", ComposedPath(loop_motion(model, x), base_path)))

    best = None
    for label, cand in candidates:
        for cert in loops:
            cand = concatenate(cand, cert.path)
        wit = cand if rho is not None else reeb_reparametrize(cand, delta=delta, grid=grid,
                                                              mode="min")
        L = lorentz_length(wit, grid, rho=rho)
        lower = L.value - L.error_bound
        history.append({"stage": label, "value": L.value, "error": L.error_bound})
        if best is None or lower > best[0]:
            best = (lower, L, wit)
    lower, L, wit = best

    end = _endpoints(wit, P, steps)
    resid = match_residual(model, end, target_end)
    info = getattr(wit, "info", None)
    if info is not None and info.check_minima is not None:
        margin = float(np.min(info.check_minima))
    else:
        margin = float(np.min(L.samples))
    if base_path.spatially_constant and base_path.profile_integral() == 0.0 and not loops:
        relation = "precedes trivially (phi = id)"
    elif lower > tol and margin > tol:
        relation = "strictly precedes"
    elif margin >= -tol and lower >= -tol:
        relation = "precedes"
    else:
        relation = "not certified positive"
    if resid > eta:
        relation = "not certified (endpoint mismatch)"
    reported = lower if relation not in ("not certified positive",
                                         "not certified (endpoint mismatch)") else 0.0
    upper, prov = None, "unknown"
    if loops and any(c.positive for c in loops) and match_residual(model, start, end) <= eta:
        upper, prov = np.inf, "loop-divergence"
    return TauEstimate(reported, L.value, L.error_bound, wit, margin, margin > tol, relation,
                       start, end, resid, upper, prov, len(loops), seed, history)


def norm_upper(model, base_path, *, n_modes=2, max_evals=2000, seed=0, delta=1e-3,
               grid=None, eta=DEFAULT_ETA, steps=1000, probe=None, rho=None):
    """Certified upper bound for ``|phi|``, ``phi`` the time-one map of ``base_path``.

    Minimizes the Shelukhin length over ``reeb_reparametrize(lambda o base,
    mode='mid')`` with strict loops ``lambda``; the base path itself is
    always a candidate.  ``rho`` weights the form as in :func:`tau_lower`.
    """
    _check_weight(model, base_path, rho)
    rng = np.random.default_rng(seed)
    P = probe_points(model) if probe is None else probe
    start = base_path.start_map(P)
    target_end = _endpoints(base_path, P, steps)
    history = []
    candidates = [("base", base_path, False)]
    if rho is None:
        candidates.append(("mid", base_path, True))
    dim = loop_family_size(model, n_modes)
    if dim and (rho is not None or not base_path.spatially_constant):
        cheap = _CheapObjective(model, support_radius=base_path.support_radius, rho=rho)
        f0 = cheap.shelukhin_mid(base_path)
        obj = lambda c: cheap.shelukhin_mid(ComposedPath(loop_motion(model, c), base_path))
        x, fx, nev = _optimize(obj, dim, rng, max_evals, 0.1)
        history.append({"stage": "loop-search", "cheap_start": f0, "cheap_best": fx,
                        "evals": nev})
        if fx < f0:
            candidates.append(("loop", ComposedPath(loop_motion(model, x), base_path),
                               rho is None))
    best = None
    for label, cand, reparam in candidates:
        wit = reeb_reparametrize(cand, delta=delta, grid=grid, mode="mid", verify=False) \
            if reparam else cand
        S = shelukhin_length(wit, grid, rho=rho)
        history.append({"stage": label, "value": S.value, "error": S.error_bound})
        up = S.value + S.error_bound
        if best is None or up < best[0]:
            best = (up, S, wit)
    up, S, wit = best
    end = _endpoints(wit, P, steps)
    resid = match_residual(model, end, target_end)
    if resid > eta:
        # fall back to the base path, which matches by definition
        S = shelukhin_length(base_path, grid, rho=rho)
        wit, up, end, resid = base_path, S.value + S.error_bound, target_end, 0.0
        history.append({"stage": "fallback", "reason": "endpoint mismatch"})
    return NormEstimate(up, S.value, S.error_bound, wit, start, end, resid, seed, history)


def positive_loop(model, k=1):
    """Positive loop obtained by iterating the periodic Reeb flow ``k`` times.

    Only S3 has a periodic Reeb flow among the models; the request is
    refused elsewhere.
    """
    if model.reeb_period is None:
        raise RefusalError(
            f"{model.kind} has no periodic Reeb flow; no positive loop is available "
            "(the model is expected to be orderable)")
    if k < 1:
        raise ValueError("k must be a positive integer")
    c = model.reeb_period * k
    path = reeb_path(model, c)
    P = probe_points(model)
    from .flows import integrate
    steps = max(1000, int(200 * c))
    end = integrate(path, P, steps).final
    resid = match_residual(model, end, P)
    return LoopCertificate(path, float(c), int(k), resid, resid <= DEFAULT_ETA)


def loop_tau_lower(model, k, **kw):
    """``tau(id, id)`` lower bound from ``k`` iterates of the positive loop."""
    cert = positive_loop(model, k)
    return tau_lower(model, reeb_path(model, 0.0), loops=[cert], **kw)


def reverse_triangle_check(first, second, *, eta=DEFAULT_ETA, grid=None, n_t=64, steps=1000):
    """Combine estimates for ``(phi1, psi)`` and ``(psi, phi2)``.

    The witnesses are concatenated (the second continuing from the first
    endpoint).  Lorentzian length is additive under concatenation, so the
    combined lower bound is the sum of the input bounds; the length of the
    concatenation is also recomputed directly as a consistency check.

    Returns
    -------
    TauEstimate
        ``history`` records the sum of inputs, the direct value and whether
        they agree within the combined error bounds.
    """
    model = first.witness.model
    resid = match_residual(model, first.end, second.start)
    if resid > eta:
        raise CompositionError(f"endpoint mismatch {resid:.3e} > eta={eta:g}")
    wit = concatenate(first.witness, second.witness)
    L = lorentz_length(wit, grid, n_t=n_t)
    # the second witness continues from where the first one ends
    end = flow_map(second.witness, first.end, steps, apply_start=False)
    total = first.lower_bound + second.lower_bound
    value = first.value + second.value
    err = first.error_bound + second.error_bound
    tol = err + L.error_bound
    margin = min(first.margin, second.margin)
    positive = first.positive and second.positive
    if total > 0 and positive:
        relation = "strictly precedes"
    elif margin >= 0:
        relation = "precedes"
    else:
        relation = "not certified positive"
    est = TauEstimate(total, value, err, wit, margin, positive, relation,
                      first.start, end, match_residual(model, end, second.end))
    est.history.append({"sum_of_inputs": total, "direct": L.value,
                        "direct_lower": L.value - L.error_bound, "tolerance": tol,
                        "consistent": bool(abs(L.value - value) <= tol)})
    return est


def conjugation_transport(estimate, rho):
    """Transport an estimate to the form ``psi^* alpha = rho alpha``.

    ``rho`` is a :class:`~contactlab.flows.ConformalFactorField` or a pair
    ``(rho_min, rho_max)``.  Returns a bracket, not an exact value.
    """
    if hasattr(rho, "min") and hasattr(rho, "max") and not isinstance(rho, tuple):
        rmin, rmax = rho.min, rho.max
    else:
        rmin, rmax = float(rho[0]), float(rho[1])
    if not (rmin > 0 and rmax >= rmin):
        raise ValueError("conformal factor bracket must satisfy 0 < min <= max")
    if isinstance(estimate, TauEstimate):
        lo = estimate.lower_bound * (rmin if estimate.lower_bound >= 0 else rmax)
        up = np.inf if estimate.upper_bound is None else estimate.upper_bound * rmax
    else:
        lo = 0.0
        up = estimate.upper_bound * rmax
    return TransportedEstimate(float(lo), float(up), float(rmin), float(rmax), estimate)


# -- estimator wrappers ------------------------------------------------------

class TauEstimator(BaseEstimator):
    """Estimator-style wrapper around :func:`tau_lower`.

    Parameters
    ----------
    n_modes : int
        Fourier modes per component of the strict loop family.
    max_evals : int
        Nelder-Mead evaluation budget.
    random_state : int or RandomState
    delta : float
        Band width of the Reeb reparametrization.
    eta : float
        Endpoint matching tolerance.
    loops : sequence of LoopCertificate, optional
    """

    def __init__(self, n_modes=2, max_evals=2000, random_state=0, delta=1e-3, eta=DEFAULT_ETA,
                 loops=None, grid=None):
        self.n_modes = n_modes
        self.max_evals = max_evals
        self.random_state = random_state
        self.delta = delta
        self.eta = eta
        self.loops = loops
        self.grid = grid

    def fit(self, path, y=None):
        rs = check_random_state(self.random_state)
        seed = int(rs.randint(0, 2 ** 31 - 1))
        self.estimate_ = tau_lower(path.model, path, n_modes=self.n_modes,
                                   max_evals=self.max_evals, seed=seed, delta=self.delta,
                                   eta=self.eta, loops=tuple(self.loops or ()), grid=self.grid)
        self.lower_bound_ = self.estimate_.lower_bound
        self.witness_ = self.estimate_.witness
        return self

    def predict(self, paths):
        check_is_fitted(self, "estimate_")
        return np.array([tau_lower(p.model, p, n_modes=self.n_modes, max_evals=self.max_evals,
                                   seed=self.estimate_.seed, delta=self.delta, eta=self.eta,
                                   grid=self.grid).lower_bound for p in paths])


class NormEstimator(BaseEstimator):
    """Estimator-style wrapper around :func:`norm_upper`."""

    def __init__(self, n_modes=2, max_evals=2000, random_state=0, delta=1e-3, eta=DEFAULT_ETA,
                 grid=None):
        self.n_modes = n_modes
        self.max_evals = max_evals
        self.random_state = random_state
        self.delta = delta
        self.eta = eta
        self.grid = grid

    def fit(self, path, y=None):
        rs = check_random_state(self.random_state)
        seed = int(rs.randint(0, 2 ** 31 - 1))
        self.estimate_ = norm_upper(path.model, path, n_modes=self.n_modes,
                                    max_evals=self.max_evals, seed=seed, delta=self.delta,
                                    eta=self.eta, grid=self.grid)
        self.upper_bound_ = self.estimate_.upper_bound
        self.witness_ = self.estimate_.witness
        return self

    def predict(self, paths):
        check_is_fitted(self, "estimate_")
        return np.array([norm_upper(p.model, p, n_modes=self.n_modes, max_evals=self.max_evals,
                                    seed=self.estimate_.seed, delta=self.delta, eta=self.eta,
                                    grid=self.grid).upper_bound for p in paths])


__all__ = [
    "TauEstimate", "NormEstimate", "LoopCertificate", "TransportedEstimate", "tau_lower",
    "norm_upper", "positive_loop", "loop_tau_lower", "reverse_triangle_check",
    "conjugation_transport", "probe_points", "match_residual", "loop_motion",
    "TauEstimator", "NormEstimator", "GridSpec",
]

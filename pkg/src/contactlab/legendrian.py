"""Legendrian isotopies: Lorentzian length, Reeb equalization, Chekanov-type bounds, loops."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import RefusalError, ToleranceError
from .flows import (BasisPath, ComposedPath, LinearTime, Mode, ReebMotion, SplineTime,
                    TimeProfile, flow_map, integrate, shelukhin_length, simpson_weights,
                    vector_field, zero_path)
from .flows.surgery import _smooth_derivative
from .genfun.curves import LegendrianCurve
from .manifolds import ContactModel

TWO_PI = 2.0 * np.pi
DEFAULT_ETA = 1e-3


# -- standard Legendrians -----------------------------------------------------

def fiber(model, q=(0.0, 0.0), n=256):
    """Fiber ``F_q = {(q, theta)}`` of the unit cotangent bundle over ``q`` (T3/STR2)."""
    if model.kind not in ("T3", "STR2"):
        raise ValueError("fibers are defined on T3 and STR2")
    th = TWO_PI * np.arange(n) / n
    pts = np.column_stack([np.full(n, float(q[0])), np.full(n, float(q[1])), th])
    return LegendrianCurve(model, model.wrap(pts) if model.kind == "T3" else pts)


def zero_section(n=256, model=None):
    """Zero section ``{(q, 0, 0)}`` of ``J^1 S^1``."""
    q = TWO_PI * np.arange(n) / n
    return LegendrianCurve(model or ContactModel("J1S1"),
                           np.column_stack([q, np.zeros(n), np.zeros(n)]))


def jet_curve(f_terms, n=256, model=None):
    """1-jet ``{(q, f'(q), f(q))}`` of a trigonometric polynomial.

    ``f_terms`` is a list of ``(coeff, ('one',) | ('cos', k) | ('sin', k))``.
    """
    q = TWO_PI * np.arange(n) / n
    f, df = np.zeros(n), np.zeros(n)
    for c, circ in f_terms:
        if circ[0] == "one":
            f += c
        elif circ[0] == "cos":
            f += c * np.cos(circ[1] * q)
            df -= c * circ[1] * np.sin(circ[1] * q)
        elif circ[0] == "sin":
            f += c * np.sin(circ[1] * q)
            df += c * circ[1] * np.cos(circ[1] * q)
        else:
            raise ValueError(f"unknown circle factor {circ!r}")
    return LegendrianCurve(model or ContactModel("J1S1"), np.column_stack([q, df, f]))


def hopf_circle(model, n=256):
    """Great circle ``{(cos s, 0, sin s, 0)}`` in S3, invariant under the half-period Reeb flow."""
    if model.kind != "S3":
        raise ValueError("hopf_circle needs S3")
    s = TWO_PI * np.arange(n) / n
    return LegendrianCurve(model, np.column_stack([np.cos(s), np.zeros(n), np.sin(s), np.zeros(n)]))


def reeb_image(curve, s):
    """``Reeb_s(L)`` in closed form."""
    return LegendrianCurve(curve.model, curve.model.wrap(curve.model.reeb_flow(curve.points, s)),
                           curve.labels)


# -- isotopies -----------------------------------------------------------------

class LegIsotopy:
    """Legendrian isotopy ``l_t = phi_t|_L`` induced by an ambient path.

    Parameters
    ----------
    curve : LegendrianCurve
        Initial Legendrian ``L_0``.
    path : HamiltonianPath
        Ambient path; its start map is applied to ``L_0`` first.
    n_t : int
        Number of stored time intervals (even).
    steps : int
        RK4 steps on [0, 1]; a multiple of ``n_t``.

    Attributes
    ----------
    times : (n_t + 1,) array
    traces : (n_t + 1, n, dim) array of the moving samples
    values : (n_t + 1, n) array of ``H_t`` on ``L_t``
    reliable : bool
        False when a J1S1 trace left the fiber support.
    """

    def __init__(self, curve, path, n_t=64, steps=1024, traces=None):
        if curve.model != path.model:
            raise ValueError("curve and path live on different models")
        if n_t % 2 or steps % n_t:
            raise ValueError("n_t must be even and divide steps")
        self.curve = curve
        self.path = path
        self.n_t = int(n_t)
        self.steps = int(steps)
        if traces is None:
            tr = integrate(path, curve.points, steps, store_every=steps // n_t)
            self.times, self.traces, self.reliable = tr.times, tr.positions, tr.reliable
        else:
            self.times, self.traces, self.reliable = traces
        self.values = np.stack([path.value(t, x) for t, x in zip(self.times, self.traces)])

    @property
    def model(self):
        return self.curve.model

    def minima(self):
        return self.values.min(axis=1)

    def maxima(self):
        return self.values.max(axis=1)

    def at(self, k):
        """``L_{t_k}`` as a LegendrianCurve."""
        return LegendrianCurve(self.model, self.model.wrap(self.traces[k]), self.curve.labels)

    @property
    def final(self):
        return self.at(-1)

    def refined(self, factor=4):
        return LegIsotopy(self.curve.refined(factor), self.path, self.n_t, self.steps)

    def velocity_residual(self, h=1e-3):
        """Largest ``|alpha(X^l) - H|`` with ``X^l`` from central RK4 differences.

        ``X^l`` at a stored time is estimated from one RK4 step forward and
        one backward (reversed field) of length ``h``; the residual is of
        order ``h^2``.
        """
        worst = 0.0
        model, path = self.model, self.path
        for t, x, v in zip(self.times[1:-1], self.traces[1:-1], self.values[1:-1]):
            fwd = _rk4_step(path, t, x, h)
            bwd = _rk4_step(path, t, x, -h)
            vel = model.chart_difference(fwd, bwd) / (2 * h)
            if model.kind == "S3":
                vel -= np.einsum("ij,ij->i", vel, x)[:, None] * x
            a = np.einsum("ij,ij->i", model.alpha_covector(x), vel)
            worst = max(worst, float(np.max(np.abs(a - v))))
        return worst


def _rk4_step(path, t, x, h):
    k1 = vector_field(path, t, x)
    k2 = vector_field(path, t + 0.5 * h, x + 0.5 * h * k1)
    k3 = vector_field(path, t + 0.5 * h, x + 0.5 * h * k2)
    k4 = vector_field(path, t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class LegLength:
    """``int min_{L_t} H_t dt`` with an error bound; iterates as ``(value, error)``."""

    value: float
    error_bound: float
    times: np.ndarray
    minima: np.ndarray
    refinement_error: np.ndarray
    quadrature_error: float
    reliable: bool = True

    def __iter__(self):
        return iter((self.value, self.error_bound))


def leg_lorentz_length(iso, refine=4):
    """Lorentzian length of a Legendrian isotopy.

    Per-time minima are taken over the samples of ``L_t`` traced from a
    ``refine``-times denser initial curve; the drop of the minimum under
    refinement bounds the sampling error.  Simpson quadrature on the stored
    times with a Richardson estimate of the quadrature error.

    Examples
    --------
    >>> from contactlab.manifolds import ContactModel
    >>> from contactlab.flows import reeb_path
    >>> T3 = ContactModel("T3")
    >>> L = leg_lorentz_length(LegIsotopy(fiber(T3), reeb_path(T3, 0.4), n_t=8, steps=128))
    >>> round(L.value, 12), round(L.error_bound, 12)
    (0.4, 0.0)
    """
    coarse = iso.minima()
    if refine > 1:
        fine_iso = iso.refined(refine)
        fine = np.minimum(fine_iso.minima(), coarse)
        reliable = iso.reliable and fine_iso.reliable
    else:
        fine, reliable = coarse, iso.reliable
    err = coarse - fine
    n = iso.n_t
    w = simpson_weights(n)
    value = float(w @ fine)
    quad = abs(value - float(simpson_weights(n // 2) @ fine[::2])) / 15.0 if n % 4 == 0 else 0.0
    return LegLength(value, quad + float(w @ err), iso.times, fine, err, quad, reliable)


def leg_reparametrize(iso, delta=1e-3, *, n_dense=1024, verify=True):
    """Compose with a Reeb motion so that ``min_{L_t} H'_t`` is nearly constant.

    With ``m(t) = min_{L_t} H_t`` and ``eps = int m`` the Reeb time solves
    ``tau' = eps - m`` (mollified) with ``tau(0) = tau(1) = 0``, so the new
    isotopy ``Reeb_{tau(t)}(L_t)`` has the same endpoints and per-time
    minima in ``(eps - delta, eps + delta)``.

    Raises
    ------
    ToleranceError
        If the re-integrated isotopy misses the band.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    model = iso.model
    steps = max(iso.steps, n_dense)
    dense = iso if iso.n_t >= n_dense else LegIsotopy(iso.curve, iso.path, n_dense, steps)
    ts, m = dense.times, dense.minima()
    level = float(simpson_weights(dense.n_t) @ m)
    knots, smooth, width, lip = _smooth_derivative(ts, m, delta)
    tau = SplineTime(knots, level - smooth)
    tau = SplineTime(knots, level - smooth, offset=float(tau(1.0)))
    path = ComposedPath(ReebMotion(model, tau), iso.path)
    # exact traces: Reeb_{tau(t)} applied to the old ones
    times = iso.times
    old = iso.traces if iso.n_t == dense.n_t else dense.traces[:: dense.n_t // iso.n_t]
    traces = np.stack([model.reeb_flow(x, float(tau(t))) for t, x in zip(times, old)])
    out = LegIsotopy(iso.curve, path, iso.n_t, iso.steps, (times, traces, iso.reliable))
    out.level, out.width, out.lipschitz = level, width, lip
    if verify:
        check = LegIsotopy(iso.curve, path, dense.n_t, steps)
        dev = float(np.max(np.abs(check.minima() - level)))
        out.max_deviation = dev
        if dev >= delta:
            raise ToleranceError(
                f"per-time minima deviate by {dev:.3e} >= delta={delta:g}; raise n_dense or delta")
    return out


# -- estimates -----------------------------------------------------------------

@dataclass
class LegTauEstimate:
    """Certified lower bound for the Lorentzian distance of two Legendrians."""

    lower_bound: float
    value: float
    error_bound: float
    witness: object
    margin: float
    positive: bool
    relation: str
    matching_residual: float = 0.0

    def to_dict(self):
        return {"lower": self.lower_bound, "value": self.value,
                "error_bound": self.error_bound, "margin": self.margin,
                "positive": self.positive, "relation": self.relation,
                "matching_residual": self.matching_residual}


def leg_tau_lower(iso, target=None, *, delta=1e-3, eta=DEFAULT_ETA, reparametrize=True,
                  tol=1e-9):
    """Lower bound for ``tau(L_0, L_1)`` from one isotopy between them.

    The isotopy is Reeb-equalized (unless it already is spatially constant)
    so that a non-negative witness exists whenever its length is positive;
    the bound is the length minus its error.  ``target`` is compared with
    the final curve by Hausdorff distance.
    """
    wit = iso
    if reparametrize and not iso.path.spatially_constant:
        wit = leg_reparametrize(iso, delta)
    L = leg_lorentz_length(wit)
    lower = L.value - L.error_bound
    margin = float(L.minima.min())
    resid = 0.0 if target is None else float(wit.final.hausdorff(target))
    if not L.reliable:
        relation = "not certified (trace left the fiber support)"
    elif resid > eta:
        relation = "not certified (endpoint mismatch)"
    elif margin > tol and lower > tol:
        relation = "strictly precedes"
    elif margin >= -tol:
        relation = "precedes"
    else:
        relation = "not certified positive"
    reported = lower if relation in ("strictly precedes", "precedes") else 0.0
    return LegTauEstimate(reported, L.value, L.error_bound, wit, margin, margin > tol,
                          relation, resid)


@dataclass
class ChekanovEstimate:
    """Upper bound for ``d(L_0, L_1) = inf |phi|`` over ``phi(L_0) = L_1``.

    ``upper_bound`` is the full-model Shelukhin length of the witness plus
    its error; it bounds the distance from ``L_0`` to ``phi(L_0)``, which is
    within ``matching_residual`` (Hausdorff) of ``L_1``.
    """

    upper_bound: float
    value: float
    error_bound: float
    witness: object
    matching_residual: float
    eta: float
    certified: bool
    params: np.ndarray = None
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"upper": self.upper_bound, "value": self.value,
                "error_bound": self.error_bound, "matching_residual": self.matching_residual,
                "eta": self.eta, "certified": self.certified,
                "params": None if self.params is None else [float(v) for v in self.params]}


ONE = TimeProfile("poly", (1.0,))


def _t3_family(model, x):
    c, a, b = x
    return BasisPath(model, [(c, ONE, Mode("const")),
                             (a, ONE, Mode("fourier", (0, 0, 1, 0))),
                             (b, ONE, Mode("fourier", (0, 0, 1, 1)))])


def _t3_guess(L0, L1):
    """Least-squares ``(c, a, b)`` from matching samples by ``theta``.

    The family ``c + a cos + b sin`` moves ``(x, theta)`` to
    ``(x + ((a, b) + c u(theta)) / sigma, theta)``.
    """
    model = L0.model
    th0, th1 = L0.points[:, 2], L1.points[:, 2]
    d = th1[:, None] - th0[None, :]
    j = np.argmin(np.abs(d - TWO_PI * np.round(d / TWO_PI)), axis=1)
    disp = model.chart_difference(L1.points, L0.points[j])[:, :2]
    th = th1
    A = np.zeros((2 * len(th), 3))
    A[0::2, 0], A[0::2, 1] = np.cos(th), 1.0
    A[1::2, 0], A[1::2, 2] = np.sin(th), 1.0
    sol = np.linalg.lstsq(A, disp.reshape(-1), rcond=None)[0]
    return model.sigma * sol


def _j1_family(model, x, K, R):
    terms = [(x[0], ONE, Mode("const"))]
    for k in range(1, K + 1):
        terms.append((x[2 * k - 1], ONE, Mode("jet", (k, 0, 0, R))))
        terms.append((x[2 * k], ONE, Mode("jet", (k, 1, 0, R))))
    return BasisPath(model, terms)


def _j1_guess(L0, L1, K):
    """Trigonometric fit of the ``z`` difference over ``q``."""
    q0, q1 = L0.points[:, 0], L1.points[:, 0]
    o0, o1 = np.argsort(q0), np.argsort(q1)
    z0 = np.interp(q1, q0[o0], L0.points[o0, 2], period=TWO_PI)
    dz = L1.points[:, 2] - z0
    cols = [np.ones_like(q1)]
    for k in range(1, K + 1):
        cols += [np.cos(k * q1), np.sin(k * q1)]
    return np.linalg.lstsq(np.column_stack(cols), dz, rcond=None)[0] * L0.model.sigma


def _jet_max_abs(x, n=4096):
    """``max |c + f(q) b(p)|`` for the J1S1 family with exact-in-``p`` reduction.

    The bump ``b`` takes every value in [0, 1] and the expression is affine
    in it, so the maximum is attained at ``b = 0`` or ``b = 1``.  The
    sampling error in ``q`` is bounded by the Lipschitz constant times half
    a step.
    """
    q = TWO_PI * np.arange(n) / n
    f = np.zeros(n)
    lip = 0.0
    for k in range(1, (len(x) - 1) // 2 + 1):
        a, b = x[2 * k - 1], x[2 * k]
        f += a * np.cos(k * q) + b * np.sin(k * q)
        lip += k * np.hypot(a, b)
    value = max(abs(x[0]), float(np.max(np.abs(x[0] + f))))
    return value, lip * np.pi / n


def chekanov_upper(L0, L1, family="auto", *, eta=DEFAULT_ETA, max_evals=400, seed=0,
                   n_modes=2, radius=None, steps=200, weights=(10.0, 100.0, 1000.0)):
    """Upper bound for the Chekanov-type distance between two Legendrians.

    The search family is autonomous: ``c + a cos(theta) + b sin(theta)`` on
    T3/STR2 (closed-form flow) and ``c + sum_k (a_k cos kq + b_k sin kq)
    b_0(p)`` with a fiber bump ``b_0`` of radius ``radius`` on J1S1 (default
    16 times the largest ``|p|`` on the curves, so that ``b_0`` is nearly
    flat where the curves live).  Starting from a least-squares guess,
    Nelder-Mead minimizes ``max |H| + w * hausdorff(phi(L_0), L_1)`` for
    each penalty weight ``w`` in ``weights``, warm-started, when the guess
    itself does not match within ``eta``.  Both families
    have their full-model Shelukhin length in closed form.  The shortest
    candidate whose Hausdorff residual is within ``eta`` is returned; if
    there is none the result carries ``certified=False`` and
    ``upper_bound = inf``.

    Examples
    --------
    >>> T3 = ContactModel("T3")
    >>> est = chekanov_upper(fiber(T3, (0, 0), 64), fiber(T3, (0.3, 0.4), 64))
    >>> est.certified, round(est.upper_bound, 3)
    (True, 0.5)
    """
    model = L0.model
    if L1.model != model:
        raise ValueError("curves live on different models")
    history = []
    if L0.hausdorff(L1) <= eta:
        path = zero_path(model)
        return ChekanovEstimate(0.0, 0.0, 0.0, path, float(L0.hausdorff(L1)), eta, True,
                                np.zeros(0), history)
    if family == "auto":
        family = {"T3": "translation", "STR2": "translation", "J1S1": "jet"}.get(model.kind)
    if family == "translation":
        build = lambda x: _t3_family(model, x)
        # autonomous: max |c + a cos + b sin| = |c| + |(a, b)| exactly
        length = lambda x: (abs(x[0]) + float(np.hypot(x[1], x[2])), 0.0)
        x0 = _t3_guess(L0, L1)
        image = lambda p, sub: flow_map(p, L0.points[sub])
    elif family == "jet":
        if radius is None:
            radius = 16.0 * max(1.0, float(np.abs(L0.points[:, 1]).max()),
                                float(np.abs(L1.points[:, 1]).max()))
        build = lambda x: _j1_family(model, x, n_modes, radius)
        length = _jet_max_abs
        x0 = _j1_guess(L0, L1, n_modes)
        image = lambda p, sub: integrate(p, L0.points[sub], steps).final
    else:
        raise ValueError(f"no Chekanov search family for {model.kind} ({family!r})")

    def mismatch(x, sub=slice(None)):
        pts = image(build(x), sub)
        return LegendrianCurve(model, model.wrap(pts), L0.labels[sub]).hausdorff(L1)

    # the optimizer sees every k-th sample of L0 only
    coarse = slice(None, None, max(1, len(L0) // 64))

    x = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(seed)
    evals = max(1, max_evals // len(weights))
    candidates = [(x, float(mismatch(x)))]
    if candidates[0][1] > eta:
        for w in weights:
            obj = lambda y, w=w: length(y)[0] + w * mismatch(y, coarse)
            dim = len(x)
            scale = 0.05 * max(1.0, float(np.max(np.abs(x))))
            simplex = np.vstack([x, x + scale * (np.eye(dim) + 0.1 * rng.standard_normal((dim, dim)))])
            res = minimize(obj, x, method="Nelder-Mead",
                           options={"maxfev": evals, "initial_simplex": simplex,
                                    "xatol": 1e-9, "fatol": 1e-12})
            x = np.asarray(res.x)
            history.append({"weight": w, "objective": float(res.fun), "evals": int(res.nfev)})
        candidates.append((x, float(mismatch(x))))
    ok = [c for c in candidates if c[1] <= eta]
    x, resid = min(ok, key=lambda c: length(c[0])[0]) if ok else min(candidates, key=lambda c: c[1])
    path = build(x)
    value, err = length(x)
    certified = resid <= eta
    upper = value + err if certified else np.inf
    return ChekanovEstimate(float(upper), float(value), float(err), path, resid, eta, certified,
                            x, history)


# -- loops ---------------------------------------------------------------------

@dataclass
class LegLoopCertificate:
    """Positive loop of a Legendrian built from a short path to ``Reeb_{-1}(L)``."""

    certified: bool
    margin: float
    input_length: float
    epsilon: float
    loop: Optional[LegIsotopy]
    matching_residual: float
    closing_residual: float
    reason: str = ""

    def to_dict(self):
        return {"certified": self.certified, "margin": self.margin,
                "input_length": self.input_length, "epsilon": self.epsilon,
                "matching_residual": self.matching_residual,
                "closing_residual": self.closing_residual, "reason": self.reason}


def loop_from_cheap_path(iso, *, eta=DEFAULT_ETA, delta=1e-3, tol=1e-3):
    """Turn an isotopy with ``phi_1(L) = Reeb_{-1}(L)`` and length ``< 1`` into a positive loop.

    The loop is ``psi_t = Reeb_t o phi_t`` with Hamiltonian
    ``1 + H_t o Reeb_{-t}``; its per-time minimum over ``L`` is at least
    ``1 - max |H_t|``, so after Reeb equalization the margin is about
    ``eps = 1 - |phi|``.  On an orderable class no such input can exist,
    which is how the construction makes the distance non-degenerate.

    Raises
    ------
    RefusalError
        If the Shelukhin length of the input path is not below 1.
    """
    model = iso.model
    S = shelukhin_length(iso.path)
    length = S.value + S.error_bound
    if length >= 1.0:
        raise RefusalError(f"input length {length:.6g} >= 1: no loop can be built")
    eps = 1.0 - length
    target = reeb_image(iso.curve, -1.0)
    resid = float(iso.final.hausdorff(target))
    if resid > eta:
        return LegLoopCertificate(False, 0.0, length, eps, None, resid, np.nan,
                                  "endpoint does not match Reeb_{-1}(L)")
    loop_path = ComposedPath(ReebMotion(model, LinearTime(1.0)), iso.path)
    loop = LegIsotopy(iso.curve, loop_path, iso.n_t, iso.steps)
    if not loop_path.spatially_constant:
        loop = leg_reparametrize(loop, delta)
    margin = float(loop.minima().min())
    closing = float(loop.final.hausdorff(iso.curve))
    if margin <= tol:
        return LegLoopCertificate(False, margin, length, eps, loop, resid, closing,
                                  "margin below tolerance")
    if closing > eta:
        return LegLoopCertificate(False, margin, length, eps, loop, resid, closing,
                                  "loop does not close")
    return LegLoopCertificate(True, margin, length, eps, loop, resid, closing)


def cheap_hopf_input(n=256, n_t=64, steps=1024):
    """Isotopy of the Hopf circle in S3 (Reeb period 1) reaching ``Reeb_{-1}(L)`` with length 1/2.

    The circle is invariant under the half-period Reeb flow, so the Reeb
    path for time ``-1/2`` ends at ``Reeb_{-1}(L) = L``.
    """
    from .flows import reeb_path
    model = ContactModel("S3", 1, 1.0 / TWO_PI)
    return LegIsotopy(hopf_circle(model, n), reeb_path(model, -0.5), n_t, steps)


# -- estimator wrappers ---------------------------------------------------------

class LegTauEstimator(BaseEstimator):
    """``fit(iso)`` computes :func:`leg_tau_lower`."""

    def __init__(self, delta=1e-3, eta=DEFAULT_ETA):
        self.delta = delta
        self.eta = eta

    def fit(self, iso, y=None, target=None):
        self.estimate_ = leg_tau_lower(iso, target, delta=self.delta, eta=self.eta)
        self.lower_bound_ = self.estimate_.lower_bound
        return self

    def predict(self, X=None):
        check_is_fitted(self, "estimate_")
        return self.lower_bound_


class ChekanovEstimator(BaseEstimator):
    """``fit((L0, L1))`` computes :func:`chekanov_upper`."""

    def __init__(self, family="auto", eta=DEFAULT_ETA, max_evals=400, random_state=0):
        self.family = family
        self.eta = eta
        self.max_evals = max_evals
        self.random_state = random_state

    def fit(self, pair, y=None):
        L0, L1 = pair
        self.estimate_ = chekanov_upper(L0, L1, self.family, eta=self.eta,
                                        max_evals=self.max_evals, seed=self.random_state)
        self.upper_bound_ = self.estimate_.upper_bound
        return self

    def predict(self, X=None):
        check_is_fitted(self, "estimate_")
        return self.upper_bound_

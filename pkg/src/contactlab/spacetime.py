"""Globally hyperbolic product spacetimes over T2, their skies and distances."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .exceptions import DomainError
from .flows import concatenate, flow_map, reeb_path, translation_path
from .genfun.curves import LegendrianCurve
from .legendrian import LegIsotopy, leg_lorentz_length
from .manifolds import ContactModel

TWO_PI = 2.0 * np.pi
#: Space of null geodesics ``ST*T2`` with the sky co-orientation.
SKY_MODEL = ContactModel("T3", sign=-1)
# 8-point Gauss-Legendre rule on [0, 1]
_GX, _GW = np.polynomial.legendre.leggauss(8)
_GX, _GW = 0.5 * (_GX + 1.0), 0.5 * _GW


@dataclass(frozen=True)
class Event:
    """Point ``(t, x, y)`` of ``R x T2``."""

    t: float
    x: float
    y: float

    @property
    def position(self):
        return np.array([self.x, self.y], dtype=float)


def as_event(e):
    return e if isinstance(e, Event) else Event(*(float(v) for v in e))


class ProductSpacetime:
    """``g = -dt^2 + h`` on ``R x T2`` with ``h = exp(2u) (dx^2 + dy^2)``.

    Parameters
    ----------
    u_terms : list of (coeff, kx, ky, phase), optional
        ``u = sum coeff * cos(kx x + ky y)`` (``sin`` if ``phase``); flat if
        empty.  ``max |u| <= 1`` is required.
    """

    def __init__(self, u_terms=()):
        self.u_terms = [(float(c), int(kx), int(ky), int(ph)) for c, kx, ky, ph in u_terms]
        if sum(abs(c) for c, *_ in self.u_terms) > 1.0 + 1e-12:
            g = TWO_PI * np.arange(128) / 128
            X, Y = np.meshgrid(g, g, indexing="ij")
            if np.max(np.abs(self.u(np.column_stack([X.ravel(), Y.ravel()])))) > 1.0:
                raise DomainError("conformal factor exponent must satisfy max |u| <= 1")

    @property
    def flat(self):
        return not self.u_terms

    def u(self, xy):
        xy = np.atleast_2d(xy)
        out = np.zeros(len(xy))
        for c, kx, ky, ph in self.u_terms:
            arg = kx * xy[:, 0] + ky * xy[:, 1]
            out += c * (np.sin(arg) if ph else np.cos(arg))
        return out

    def grad_u(self, xy):
        xy = np.atleast_2d(xy)
        out = np.zeros((len(xy), 2))
        for c, kx, ky, ph in self.u_terms:
            arg = kx * xy[:, 0] + ky * xy[:, 1]
            d = c * (np.cos(arg) if ph else -np.sin(arg))
            out[:, 0] += kx * d
            out[:, 1] += ky * d
        return out

    def to_dict(self):
        return {"u_terms": [list(t) for t in self.u_terms]}


def deck_translates(a, b):
    """The 9 lifts ``b + 2 pi (i, j)``, ``i, j in {-1, 0, 1}``, nearest to ``a``.

    ``b`` is first reduced to the period cell around ``a``.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    base = a + (b - a) - TWO_PI * np.round((b - a) / TWO_PI)
    shifts = TWO_PI * np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], float)
    return base + shifts


def torus_distance(a, b):
    """Flat distance on ``T2``: minimum over the 9 nearest deck translates."""
    lifts = deck_translates(a, b)
    return float(np.min(np.linalg.norm(lifts - np.asarray(a, float), axis=1)))


def _shortest_lift(a, b):
    lifts = deck_translates(a, b)
    return lifts[np.argmin(np.linalg.norm(lifts - np.asarray(a, float), axis=1))]


# -- null geodesics ------------------------------------------------------------

@dataclass
class NullGeodesic:
    """Samples of null geodesics, one column per initial direction.

    ``t, x, y, theta`` have shape (k, n_dir); ``theta`` is the future
    spatial direction of the velocity.  ``drift`` is the largest deviation
    of ``|dx/dt|_h`` from 1 before each renormalization.
    """

    s: np.ndarray
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    drift: float = 0.0


def _geodesic_rhs(st, z):
    xy, v = z[:, :2], z[:, 2:]
    g = st.grad_u(xy)
    gv = np.einsum("ij,ij->i", g, v)
    vv = np.einsum("ij,ij->i", v, v)
    acc = -2.0 * gv[:, None] * v + vv[:, None] * g
    return np.concatenate([v, acc], axis=1)


def null_geodesic(st, event, theta, span, max_step=0.01, store=None):
    """Null geodesics through ``event`` with future spatial direction ``theta``.

    The spatial part is an ``h``-geodesic parametrized by ``t`` (unit
    ``h``-speed); ``span < 0`` follows it into the past.  Flat metrics are
    closed form; conformal ones use RK4 on the geodesic equations with the
    speed renormalized to 1 after every step.

    Examples
    --------
    >>> g = null_geodesic(ProductSpacetime(), (0, 0, 0), 0.0, 1.0, store=3)
    >>> g.t[:, 0].tolist(), g.x[:, 0].tolist()
    ([0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
    """
    ev = as_event(event)
    if abs(span) > 100:
        raise ValueError("|span| must not exceed 100")
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    n_steps = max(1, int(np.ceil(abs(span) / max_step)))
    store = n_steps + 1 if store is None else int(store)
    s = np.linspace(0.0, span, store)
    if st.flat:
        x = ev.x + np.outer(s, np.cos(th))
        y = ev.y + np.outer(s, np.sin(th))
        return NullGeodesic(s, ev.t + np.repeat(s[:, None], len(th), 1),
                            np.mod(x, TWO_PI), np.mod(y, TWO_PI), np.tile(th, (store, 1)))
    sign = 1.0 if span >= 0 else -1.0
    xy0 = np.tile(ev.position, (len(th), 1))
    speed = np.exp(-st.u(xy0))
    z = np.concatenate([xy0, sign * speed[:, None] * np.column_stack([np.cos(th), np.sin(th)])], 1)
    h = abs(span) / n_steps
    out = [z.copy()]
    marks = np.round(np.linspace(0, n_steps, store)).astype(int)
    drift = 0.0
    for k in range(1, n_steps + 1):
        k1 = _geodesic_rhs(st, z)
        k2 = _geodesic_rhs(st, z + 0.5 * h * k1)
        k3 = _geodesic_rhs(st, z + 0.5 * h * k2)
        k4 = _geodesic_rhs(st, z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        nrm = np.exp(st.u(z[:, :2])) * np.linalg.norm(z[:, 2:], axis=1)
        drift = max(drift, float(np.max(np.abs(nrm - 1.0))))
        z[:, 2:] /= nrm[:, None]
        if k in marks:
            out.append(z.copy())
    traj = np.stack(out[: store])
    vel = sign * traj[:, :, 2:]
    return NullGeodesic(s, ev.t + np.repeat(s[:, None], len(th), 1),
                        np.mod(traj[:, :, 0], TWO_PI), np.mod(traj[:, :, 1], TWO_PI),
                        np.mod(np.arctan2(vel[..., 1], vel[..., 0]), TWO_PI), drift)


# -- skies ---------------------------------------------------------------------

@dataclass
class Sky:
    """Sky of an event as a Legendrian in ``ST*T2`` (points ``(x, y, theta)`` at ``t = 0``)."""

    event: Event
    curve: LegendrianCurve
    drift: float = 0.0
    flagged: bool = False


def sky(st, event, n=256, max_step=0.01):
    """Null geodesics through ``event`` recorded on the Cauchy slice ``t = 0``.

    Each direction is traced to ``t = 0`` and stored as (position, direction
    of the momentum).  For flat ``h`` this is ``{(q - t0 u(theta), theta)}``,
    the Reeb image of the fiber ``F_q`` for time ``t0`` in the sky
    co-orientation.
    """
    ev = as_event(event)
    th = TWO_PI * np.arange(n) / n
    if ev.t == 0:
        pts = np.column_stack([np.full(n, ev.x), np.full(n, ev.y), th])
        return Sky(ev, LegendrianCurve(SKY_MODEL, SKY_MODEL.wrap(pts)))
    g = null_geodesic(st, ev, th, -ev.t, max_step, store=2)
    pts = np.column_stack([g.x[-1], g.y[-1], g.theta[-1]])
    flagged = not np.all(np.isfinite(pts))
    return Sky(ev, LegendrianCurve(SKY_MODEL, SKY_MODEL.wrap(np.nan_to_num(pts))), g.drift, flagged)


# -- the spacetime distance ------------------------------------------------------

@dataclass
class CollocationResult:
    """Eigentime of the best timelike path found by collocation (a lower bound)."""

    value: float
    value_half: float
    nodes: np.ndarray
    converged: bool


def _eigentime(st, X, dt):
    """Gauss-quadrature eigentime of the piecewise-linear path through ``X``."""
    d = np.diff(X, axis=0)
    pts = X[:-1, None, :] + _GX[None, :, None] * d[:, None, :]
    w = np.exp(2 * st.u(pts.reshape(-1, 2))).reshape(pts.shape[:2]) * (d ** 2).sum(1)[:, None] / dt ** 2
    if np.any(w >= 1.0):
        return -np.inf
    return float(dt * np.sum(np.sqrt(1.0 - w) @ _GW))


def _collocate(st, a, b, T, n):
    dt = T / n
    line = a + np.outer(np.linspace(0, 1, n + 1), b - a)

    def obj(z):
        X = np.vstack([a, z.reshape(-1, 2), b])
        d = np.diff(X, axis=0)
        m = 0.5 * (X[1:] + X[:-1])
        e2u = np.exp(2 * st.u(m))
        gu = st.grad_u(m)
        dd = (d ** 2).sum(1)
        w = e2u * dd / dt ** 2
        if np.any(w >= 1.0):
            return 1e6 * float(np.max(w)), np.zeros_like(z)
        r = np.sqrt(1.0 - w)
        dfdw = -0.5 * dt / r
        # dw/dX_{i+1} and dw/dX_i for each segment i
        gd = 2 * e2u[:, None] * d / dt ** 2
        gm = (e2u * dd / dt ** 2)[:, None] * gu   # from the midpoint, shared by both ends
        grad = np.zeros_like(X)
        grad[1:] += dfdw[:, None] * (gd + gm)
        grad[:-1] += dfdw[:, None] * (-gd + gm)
        return -float(dt * r.sum()), -grad[1:-1].ravel()

    res = minimize(obj, line[1:-1].ravel(), jac=True, method="L-BFGS-B",
                   options={"maxiter": 2000, "gtol": 1e-10})
    X = np.vstack([a, res.x.reshape(-1, 2), b])
    return _eigentime(st, X, dt), X


def tau_g_collocation(st, p, q, n_nodes=64):
    """Lower bound for ``tau_g(p, q)`` by maximizing eigentime over timelike polygons.

    Straight-line starts towards each of the 9 nearest deck translates of
    ``q``; the best polygon is re-evaluated with 8-point Gauss quadrature
    on every segment.  ``value_half`` is the same at ``n_nodes / 2``.
    """
    p, q = as_event(p), as_event(q)
    T = q.t - p.t
    if T <= 0:
        return CollocationResult(0.0, 0.0, np.zeros((0, 2)), True)
    best = (0.0, None)
    for b in deck_translates(p.position, q.position):
        if np.linalg.norm(b - p.position) * np.exp(-1.0) >= T:
            continue  # cannot be timelike even where h is smallest
        val, X = _collocate(st, p.position, b, T, n_nodes)
        if val > best[0]:
            best = (val, X, b)
    if best[1] is None:
        return CollocationResult(0.0, 0.0, np.zeros((0, 2)), True)
    half, _ = _collocate(st, p.position, best[2], T, n_nodes // 2)
    conv = abs(best[0] - half) <= 1e-3 * max(1.0, best[0])
    return CollocationResult(best[0], max(half, 0.0), best[1], bool(conv))


def tau_g(st, p, q, n_nodes=64):
    """Lorentzian distance of the spacetime.

    Flat: ``sqrt(dt^2 - d^2)`` when ``dt >= d`` (``d`` the torus distance),
    else 0.  Conformal: the collocation lower bound.

    Examples
    --------
    >>> tau_g(ProductSpacetime(), (0, 0, 0), (1, 0.6, 0))
    0.8
    """
    p, q = as_event(p), as_event(q)
    if st.flat:
        dt = q.t - p.t
        d = torus_distance(p.position, q.position)
        return float(np.sqrt(dt * dt - d * d)) if dt >= d else 0.0
    return tau_g_collocation(st, p, q, n_nodes).value


# -- sky distances ---------------------------------------------------------------

@dataclass
class SkyDistanceEstimate:
    """Upper bound for the distance between two skies with its witness decomposition."""

    upper_bound: float
    reeb_part: float
    translation_part: float
    witness: object
    matching_residual: float
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {"upper": self.upper_bound, "reeb_part": self.reeb_part,
                "translation_part": self.translation_part,
                "matching_residual": self.matching_residual}


def sky_distance_upper(st, p, q, n=256):
    """Upper bound for ``d(S(p), S(q))`` from a closed-form witness.

    The witness concatenates the Reeb shift by ``q.t - p.t`` with the
    translation lift along the shortest torus segment from ``p`` to ``q``;
    its Shelukhin length is ``|dt| + d_h(p, q)`` exactly.  Conformal
    metrics are supported for pure time shifts only (the witness is then
    the cogeodesic flow).
    """
    p, q = as_event(p), as_event(q)
    dt = q.t - p.t
    lift = _shortest_lift(p.position, q.position)
    dx = lift - p.position
    d = float(np.linalg.norm(dx))
    Sp, Sq = sky(st, p, n), sky(st, q, n)
    if not st.flat:
        if d > 1e-12:
            raise DomainError("conformal metrics: only pure time shifts have a closed-form witness")
        moved = sky(st, Event(q.t, p.x, p.y), n).curve
        resid = float(moved.hausdorff(Sq.curve))
        return SkyDistanceEstimate(abs(dt), abs(dt), 0.0, "cogeodesic flow", resid,
                                   ["conformal: length measured in the conformal form"])
    model = SKY_MODEL
    # the Reeb flow of the sky form moves x by -s u(theta): forward in time
    wit = concatenate(reeb_path(model, dt), translation_path(model, dx[0], dx[1]))
    moved = flow_map(wit, Sp.curve.points)
    resid = float(LegendrianCurve(model, model.wrap(moved)).hausdorff(Sq.curve))
    return SkyDistanceEstimate(abs(dt) + d, abs(dt), d, wit, resid)


def continuity_scaling(st, p, deltas=(0.2, 0.1, 0.05, 0.025), n=256):
    """Rows ``(delta, upper, reeb_part, translation_part)`` for ``S((0, p))`` vs ``S((delta, p))``.

    Returns the rows and the single constant ``C = max upper / delta``.
    """
    x, y = (p.x, p.y) if isinstance(p, Event) else p
    rows = []
    for dl in deltas:
        est = sky_distance_upper(st, Event(0.0, x, y), Event(float(dl), x, y), n)
        rows.append((float(dl), est.upper_bound, est.reeb_part, est.translation_part))
    C = max(r[1] / r[0] for r in rows)
    return rows, float(C)


@dataclass
class SkyOrderCertificate:
    """Positive sky isotopy along the straight segment from ``p`` to ``q``."""

    margin: float
    lower_bound: float
    sampled_margin: float
    sampled_length: float
    tau_g: float
    isotopy: LegIsotopy
    matching_residual: float

    def to_dict(self):
        return {"margin": self.margin, "lower_bound": self.lower_bound,
                "sampled_margin": self.sampled_margin, "sampled_length": self.sampled_length,
                "tau_g": self.tau_g, "matching_residual": self.matching_residual}


def sky_order_certificate(st, p, q, n=256, n_t=16, steps=256):
    """Certificate that ``S(p)`` precedes ``S(q)`` for a timelike pair, else ``None``.

    Along ``gamma(s) = p + s (q - p)`` the skies move by the autonomous sky
    Hamiltonian ``dt - dx . u(theta)``, whose minimum ``dt - |dx|`` is the
    margin and whose Lorentzian length is ``dt - d_h(p, q)``.  The sampled
    isotopy is traced as a check.
    """
    if not st.flat:
        raise DomainError("sky order certificates need a flat spatial metric")
    p, q = as_event(p), as_event(q)
    dt = q.t - p.t
    lift = _shortest_lift(p.position, q.position)
    dx = lift - p.position
    d = float(np.linalg.norm(dx))
    if dt <= d:
        return None
    path = translation_path(SKY_MODEL, dx[0], dx[1], dt)
    iso = LegIsotopy(sky(st, p, n).curve, path, n_t, steps)
    L = leg_lorentz_length(iso, refine=1)
    resid = float(iso.final.hausdorff(sky(st, q, n).curve))
    margin = dt - d
    return SkyOrderCertificate(margin, margin, float(iso.minima().min()), L.value,
                               tau_g(st, p, q), iso, resid)

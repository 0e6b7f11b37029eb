"""
Model contact manifolds, scalar fields on them and grid extremization.

Four models are provided, each with closed-form contact form, Reeb field
and Reeb flow:

=====  ==========================  ==========================================
kind   coordinates                 contact form
=====  ==========================  ==========================================
T3     (x, y, theta) in [0, 2pi)^3 cos(theta) dx + sin(theta) dy
STR2   (x1, x2, theta), x in R^2   cos(theta) dx1 + sin(theta) dx2
J1S1   (q, p, z)                   dz - p dq
S3     (x1, y1, x2, y2), |x| = 1   x1 dy1 - y1 dx1 + x2 dy2 - y2 dx2
=====  ==========================  ==========================================

A model may carry a co-orientation ``sign`` and a positive ``scale``; the
form actually used is ``sign * scale * alpha``.  Contact vector fields obey
``X^{c alpha}_H = X^{alpha}_{H / c}`` so every closed form below is written
for the standard form and rescaled.

Contact vector fields are fixed by ``alpha(X_H) = H`` together with
``i_{X_H} d alpha = dH(R) alpha - dH``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.optimize import minimize

from ._validation import as_points, check_choice, check_int
from .exceptions import DomainError, RefusalError, UnsupportedFieldError

TWO_PI = 2.0 * np.pi
KINDS = ("T3", "J1S1", "S3", "STR2")
S3_TOL = 1e-9


@dataclass(frozen=True)
class ContactModel:
    """One of the four model contact manifolds.

    Parameters
    ----------
    kind : {'T3', 'J1S1', 'S3', 'STR2'}
    sign : {+1, -1}
        Co-orientation; the form is multiplied by ``sign``.
    scale : float
        Positive constant multiplying the form.
    """

    kind: str
    sign: int = 1
    scale: float = 1.0

    def __post_init__(self):
        check_choice(self.kind, "kind", KINDS)
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")

    # -- basic geometry -------------------------------------------------
    @property
    def dim(self):
        return 4 if self.kind == "S3" else 3

    @property
    def sigma(self):
        return float(self.sign) * float(self.scale)

    @property
    def periods(self):
        """Period of each ambient coordinate (``None`` if not periodic)."""
        return {
            "T3": (TWO_PI, TWO_PI, TWO_PI),
            "STR2": (None, None, TWO_PI),
            "J1S1": (TWO_PI, None, None),
            "S3": (None, None, None, None),
        }[self.kind]

    @property
    def compact(self):
        return self.kind in ("T3", "S3")

    @property
    def reeb_period(self):
        """Minimal common period of the Reeb flow, or ``None``."""
        if self.kind == "S3":
            return TWO_PI * self.scale
        return None

    def check_points(self, points):
        pts = as_points(points, self.dim)
        if self.kind == "S3":
            dev = np.abs(np.linalg.norm(pts, axis=1) - 1.0)
            if np.any(dev > S3_TOL):
                raise DomainError(
                    f"point off the unit sphere (|norm - 1| = {dev.max():.3e})")
        return pts

    def check_tangents(self, points, tangents):
        vec = as_points(tangents, self.dim)
        if self.kind == "S3":
            dots = np.abs(np.einsum("ij,ij->i", points, vec))
            if np.any(dots > S3_TOL * np.maximum(1.0, np.linalg.norm(vec, axis=1))):
                raise DomainError("tangent vector not tangent to the sphere")
        return vec

    def project(self, points):
        """Normalize S3 points; identity for the other models."""
        if self.kind == "S3":
            return points / np.linalg.norm(points, axis=1, keepdims=True)
        return points

    def wrap(self, points):
        """Reduce periodic coordinates to [0, period)."""
        pts = np.array(points, dtype=float, copy=True)
        for i, per in enumerate(self.periods):
            if per is not None:
                pts[..., i] = np.mod(pts[..., i], per)
        return pts

    def chart_difference(self, a, b):
        """Componentwise ``a - b`` with periodic coordinates folded to (-per/2, per/2]."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        for i, per in enumerate(self.periods):
            if per is not None:
                d[..., i] = d[..., i] - per * np.round(d[..., i] / per)
        return d

    def chart_distance(self, a, b):
        """Chart-Euclidean (S3: ambient Euclidean) distance, per point."""
        return np.linalg.norm(self.chart_difference(a, b), axis=-1)

    # -- contact data ---------------------------------------------------
    def alpha_covector(self, points):
        """Covector of the (signed, scaled) form at each point, shape (n, dim)."""
        pts = np.asarray(points, dtype=float)
        if self.kind in ("T3", "STR2"):
            th = pts[:, 2]
            cov = np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
        elif self.kind == "J1S1":
            cov = np.stack([-pts[:, 1], np.zeros(len(pts)), np.ones(len(pts))], axis=1)
        else:
            x1, y1, x2, y2 = pts.T
            cov = np.stack([-y1, x1, -y2, x2], axis=1)
        return self.sigma * cov

    def _reeb_std(self, pts):
        if self.kind in ("T3", "STR2"):
            th = pts[:, 2]
            return np.stack([np.cos(th), np.sin(th), np.zeros_like(th)], axis=1)
        if self.kind == "J1S1":
            out = np.zeros_like(pts)
            out[:, 2] = 1.0
            return out
        x1, y1, x2, y2 = pts.T
        return np.stack([-y1, x1, -y2, x2], axis=1)

    def reeb(self, points):
        return self._reeb_std(np.asarray(points, dtype=float)) / self.sigma

    def reeb_flow(self, points, s):
        """Reeb flow for time ``s`` (scalar or one value per point)."""
        pts = np.array(points, dtype=float, copy=True)
        s = np.broadcast_to(np.asarray(s, dtype=float), (len(pts),)) / self.sigma
        if self.kind in ("T3", "STR2"):
            th = pts[:, 2]
            pts[:, 0] += s * np.cos(th)
            pts[:, 1] += s * np.sin(th)
        elif self.kind == "J1S1":
            pts[:, 2] += s
        else:
            c, sn = np.cos(s), np.sin(s)
            x1, y1, x2, y2 = pts.T.copy()
            pts[:, 0] = c * x1 - sn * y1
            pts[:, 1] = sn * x1 + c * y1
            pts[:, 2] = c * x2 - sn * y2
            pts[:, 3] = sn * x2 + c * y2
        return pts

    def reeb_flow_jacobian_T(self, points, s, grads):
        """Return ``(D Phi_s)^T grads`` where ``Phi_s`` is the Reeb flow at ``points``.

        Used to pull back gradients: if ``g = H o Phi_s`` then
        ``grad g(x) = (D Phi_s(x))^T grad H(Phi_s x)``.
        """
        g = np.array(grads, dtype=float, copy=True)
        s = np.broadcast_to(np.asarray(s, dtype=float), (len(g),)) / self.sigma
        if self.kind in ("T3", "STR2"):
            th = np.asarray(points, dtype=float)[:, 2]
            # d/dtheta of (x + s cos, y + s sin)
            g[:, 2] += s * (-np.sin(th) * g[:, 0] + np.cos(th) * g[:, 1])
        elif self.kind == "S3":
            c, sn = np.cos(s), np.sin(s)
            a1, b1, a2, b2 = g.T.copy()
            # transpose of the rotation by angle s in each complex plane
            g[:, 0] = c * a1 + sn * b1
            g[:, 1] = -sn * a1 + c * b1
            g[:, 2] = c * a2 + sn * b2
            g[:, 3] = -sn * a2 + c * b2
        return g

    def xi_basis(self, points):
        """Two vectors spanning the contact planes, shape (n, 2, dim)."""
        pts = np.asarray(points, dtype=float)
        n = len(pts)
        if self.kind in ("T3", "STR2"):
            th = pts[:, 2]
            e1 = np.stack([-np.sin(th), np.cos(th), np.zeros(n)], axis=1)
            e2 = np.tile([0.0, 0.0, 1.0], (n, 1))
        elif self.kind == "J1S1":
            e1 = np.stack([np.ones(n), np.zeros(n), pts[:, 1]], axis=1)
            e2 = np.tile([0.0, 1.0, 0.0], (n, 1))
        else:
            x1, y1, x2, y2 = pts.T
            e1 = np.stack([-x2, y2, x1, -y1], axis=1)
            e2 = np.stack([-y2, -x2, y1, x1], axis=1)
        return np.stack([e1, e2], axis=1)

    def contact_field(self, points, H, grad):
        """Closed-form contact vector field of a Hamiltonian.

        Parameters
        ----------
        points : (n, dim) array
        H : (n,) array of Hamiltonian values
        grad : (n, dim) array of ambient gradients
        """
        pts = np.asarray(points, dtype=float)
        h = np.asarray(H, dtype=float) / self.sigma
        g = np.asarray(grad, dtype=float) / self.sigma
        if self.kind in ("T3", "STR2"):
            th = pts[:, 2]
            c, s = np.cos(th), np.sin(th)
            # X = h u + h_theta u', theta_dot = -u'.grad_xy h
            return np.stack([
                h * c - g[:, 2] * s,
                h * s + g[:, 2] * c,
                s * g[:, 0] - c * g[:, 1],
            ], axis=1)
        if self.kind == "J1S1":
            p = pts[:, 1]
            return np.stack([-g[:, 1], g[:, 0] + p * g[:, 2], h - p * g[:, 1]], axis=1)
        basis = self.xi_basis(pts)
        v1, v2 = basis[:, 0], basis[:, 1]
        d1 = np.einsum("ij,ij->i", g, v1)
        d2 = np.einsum("ij,ij->i", g, v2)
        R = self._reeb_std(pts)
        return h[:, None] * R - 0.5 * d2[:, None] * v1 + 0.5 * d1[:, None] * v2

    def reeb_derivative(self, points, grad):
        """``dH(R)`` from ambient gradients."""
        return np.einsum("ij,ij->i", np.asarray(grad, dtype=float), self.reeb(points))

    # -- charts used for grids -------------------------------------------
    def chart_names(self):
        return {
            "T3": ("x", "y", "theta"),
            "STR2": ("x1", "x2", "theta"),
            "J1S1": ("q", "p", "z"),
            "S3": ("eta", "xi1", "xi2"),
        }[self.kind]

    def chart_periods(self):
        if self.kind in ("T3", "STR2"):
            return (TWO_PI, TWO_PI, TWO_PI)
        if self.kind == "J1S1":
            return (TWO_PI, None, None)
        return (None, TWO_PI, TWO_PI)

    def embed(self, chart):
        """Map chart coordinates (n, 3) to model points."""
        c = np.asarray(chart, dtype=float)
        if self.kind != "S3":
            return c
        eta, a, b = c.T
        return np.stack([np.cos(eta) * np.cos(a), np.cos(eta) * np.sin(a),
                         np.sin(eta) * np.cos(b), np.sin(eta) * np.sin(b)], axis=1)

    def chart_gradient(self, chart, grad):
        """Convert ambient gradients to chart gradients (chain rule)."""
        if self.kind != "S3":
            return np.asarray(grad, dtype=float)
        eta, a, b = np.asarray(chart, dtype=float).T
        g = np.asarray(grad, dtype=float)
        ce, se = np.cos(eta), np.sin(eta)
        d_eta = (-se * np.cos(a) * g[:, 0] - se * np.sin(a) * g[:, 1]
                 + ce * np.cos(b) * g[:, 2] + ce * np.sin(b) * g[:, 3])
        d_a = ce * (-np.sin(a) * g[:, 0] + np.cos(a) * g[:, 1])
        d_b = se * (-np.sin(b) * g[:, 2] + np.cos(b) * g[:, 3])
        return np.stack([d_eta, d_a, d_b], axis=1)


def alpha_eval(model, point, tangent):
    """Evaluate the model contact form on tangent vectors.

    Examples
    --------
    >>> alpha_eval(ContactModel("J1S1"), [0.0, 2.0, 0.0], [1.0, 0.0, 0.0])
    -2.0
    """
    pts = model.check_points(point)
    vec = model.check_tangents(pts, tangent)
    out = np.einsum("ij,ij->i", model.alpha_covector(pts), vec)
    return float(out[0]) if np.ndim(point) == 1 else out


def reeb_field(model, point):
    pts = model.check_points(point)
    out = model.reeb(pts)
    return out[0] if np.ndim(point) == 1 else out


class ScalarField:
    """A function on a model with optional analytic gradient.

    Parameters
    ----------
    func : callable
        Maps an (n, dim) array of model points to (n,) values.
    grad : callable, optional
        Maps points to ambient gradients of shape (n, dim).
    lipschitz : float, optional
        Known Lipschitz constant in chart coordinates.
    tail : float, optional
        Value taken outside a compact set (J1S1 fiber tail).
    support_radius : float, optional
        ``func`` equals ``tail`` when ``|p| > support_radius`` (J1S1).
    """

    def __init__(self, func, grad=None, *, lipschitz=None, tail=None,
                 support_radius=None, constant=None):
        self.func = func
        self.grad = grad
        self.lipschitz = lipschitz
        self.tail = tail
        self.support_radius = support_radius
        self.constant = constant

    @classmethod
    def constant_field(cls, value, dim):
        value = float(value)
        return cls(lambda x: np.full(len(x), value),
                   lambda x: np.zeros((len(x), dim)),
                   lipschitz=0.0, tail=value, constant=value)

    def __call__(self, points):
        return np.asarray(self.func(np.asarray(points, dtype=float)), dtype=float)

    def gradient(self, points):
        if self.grad is None:
            raise UnsupportedFieldError("field has no analytic gradient")
        return np.asarray(self.grad(np.asarray(points, dtype=float)), dtype=float)

    def lift(self, model_str2):
        """View a T3 field as a Z^2-periodic field on STR2."""
        if model_str2.kind != "STR2":
            raise ValueError("lift target must be an STR2 model")
        wrap = lambda x: np.column_stack([np.mod(x[:, 0], TWO_PI),
                                          np.mod(x[:, 1], TWO_PI), x[:, 2]])
        grad = None if self.grad is None else (lambda x: self.grad(wrap(x)))
        return ScalarField(lambda x: self.func(wrap(x)), grad,
                           lipschitz=self.lipschitz, constant=self.constant)


def contact_vector_field(model, H, point):
    """Contact vector field of the scalar field ``H`` at ``point``."""
    pts = model.check_points(point)
    if not isinstance(H, ScalarField):
        raise UnsupportedFieldError("H must be a ScalarField with a gradient")
    out = model.contact_field(pts, H(pts), H.gradient(pts))
    return out[0] if np.ndim(point) == 1 else out


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for extremization in chart coordinates.

    ``bounds`` gives (lo, hi) for non-periodic chart coordinates; entries for
    periodic coordinates are ignored.  ``depth`` is the number of
    branch-and-bound refinement levels used to certify extrema.
    """

    counts: tuple = (24, 24, 24)
    bounds: Optional[tuple] = None
    depth: int = 3
    max_boxes: int = 4096
    polish: int = 3

    def __post_init__(self):
        if len(self.counts) != 3:
            raise ValueError("counts must have three entries")
        for c in self.counts:
            check_int(c, "grid count", minimum=2)
        check_int(self.depth, "depth", minimum=0)

    def scaled(self, factor):
        return GridSpec(tuple(max(2, int(round(c * factor))) for c in self.counts),
                        self.bounds, self.depth, self.max_boxes, self.polish)

    def axes(self, model, support_radius=None):
        """Node coordinates, cell half-widths and closed flags per chart axis."""
        periods = model.chart_periods()
        defaults = {"J1S1": ((None), (-4.0, 4.0), (-1.0, 1.0)),
                    "S3": ((0.0, 0.5 * np.pi), None, None)}
        nodes, half, closed = [], [], []
        for i, (n, per) in enumerate(zip(self.counts, periods)):
            if per is not None:
                if n < 8:
                    raise ValueError("periodic dimensions need at least 8 samples")
                nodes.append(np.arange(n) * per / n)
                half.append(0.5 * per / n)
                closed.append(None)
                continue
            lo_hi = None
            if self.bounds is not None and self.bounds[i] is not None:
                lo_hi = tuple(self.bounds[i])
            elif model.kind in defaults:
                lo_hi = defaults[model.kind][i]
            if model.kind == "S3" and i == 0:
                lo_hi = (0.0, 0.5 * np.pi)
            lo, hi = float(lo_hi[0]), float(lo_hi[1])
            if (support_radius is not None and model.kind == "J1S1" and i == 1
                    and min(-lo, hi) < 1.1 * support_radius):
                raise ValueError("fiber bounds must exceed the support radius by 10%")
            nodes.append(np.linspace(lo, hi, n))
            half.append(0.5 * (hi - lo) / (n - 1))
            closed.append((lo, hi))
        return nodes, np.array(half), closed


@dataclass
class Extremum:
    """Result of :func:`extremize`."""

    min: float
    max: float
    arg_min: Optional[np.ndarray]
    arg_max: Optional[np.ndarray]
    error_bound: float
    min_error: float = 0.0
    max_error: float = 0.0
    n_evals: int = 0

    def __iter__(self):
        return iter((self.min, self.max, self.arg_min, self.arg_max, self.error_bound))


def _chart_eval(model, field, chart, need_grad=True):
    pts = model.embed(chart)
    vals = field(pts)
    if not need_grad:
        return vals, None
    if field.grad is not None:
        grads = model.chart_gradient(chart, field.gradient(pts))
    else:
        h = 1e-6
        grads = np.empty_like(chart)
        for k in range(chart.shape[1]):
            step = np.zeros(chart.shape[1])
            step[k] = h
            grads[:, k] = (field(model.embed(chart + step))
                           - field(model.embed(chart - step))) / (2 * h)
    return vals, grads


def _basin_starts(flat_vals, shape, periodic, k):
    """Indices of the ``k`` lowest discrete local minima of a grid sample.

    Starting polishes from distinct basins, not the ``k`` lowest samples
    (which usually crowd one basin), guards against a wrong-basin polish.
    """
    grid = flat_vals.reshape(shape)
    modes = ["wrap" if p else "nearest" for p in periodic]
    local = np.flatnonzero((grid <= minimum_filter(grid, size=3, mode=modes)).ravel())
    local = local[np.argsort(flat_vals[local], kind="stable")]
    return local[:max(1, k)]


def _hessian_bound(vals_grid, grads_grid, half, periodic):
    """Finite-difference estimate of the gradient Lipschitz constant, x1.5."""
    m2 = 0.0
    for ax in range(grads_grid.ndim - 1):
        if grads_grid.shape[ax] < 2:
            continue
        if periodic[ax]:
            diff = np.roll(grads_grid, -1, axis=ax) - grads_grid
        else:
            diff = np.diff(grads_grid, axis=ax)
        m2 = max(m2, float(np.max(np.linalg.norm(diff, axis=-1))) / (2 * half[ax]))
    return 1.5 * m2


def extremize(model, field, grid=None, *, tail=None, lipschitz=None, which="both"):
    """Certified minimum and maximum of a scalar field over a model.

    The field is sampled on the chart grid, the best samples are polished
    with L-BFGS-B, and boxes whose second-order lower bound
    ``f_i - |grad f_i| r - M2 r^2 / 2`` could still beat the incumbent are
    bisected for up to ``grid.depth`` levels.  ``M2`` is a finite-difference
    estimate of the gradient Lipschitz constant times 1.5.  The reported
    error is ``best - floor`` where ``floor`` is the smallest bound over all
    remaining boxes.  When a Lipschitz constant is supplied (or stored on the
    field) the plain bound ``L * h``, ``h`` the final cell diameter, is used
    if smaller.

    Parameters
    ----------
    model : ContactModel
    field : ScalarField or callable
    grid : GridSpec, optional
    tail : float, optional
        Value of the field outside the fiber bounds; required on J1S1.
    lipschitz : float, optional
    which : {'both', 'min', 'max'}
        Skip the work for the side not requested (its entries are NaN).

    Returns
    -------
    Extremum
        Also unpacks as ``(min, max, arg_min, arg_max, error_bound)``.
    """
    grid = GridSpec() if grid is None else grid
    check_choice(which, "which", ("both", "min", "max"))
    if not isinstance(field, ScalarField):
        field = ScalarField(field)
    if tail is None:
        tail = field.tail
    if field.constant is not None:
        c = float(field.constant)
        z = model.embed(np.zeros((1, 3)))[0]
        return Extremum(c, c, z, z, 0.0)
    if model.kind == "J1S1" and tail is None:
        raise RefusalError("J1S1 is non-compact: declare the field's tail value")
    lipschitz = field.lipschitz if lipschitz is None else lipschitz

    nodes, half, closed = grid.axes(model, field.support_radius)
    periodic = [c is None for c in closed]
    mesh = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1)
    shape = mesh.shape[:-1]
    chart = mesh.reshape(-1, 3)
    vals, grads = _chart_eval(model, field, chart)
    n_evals = 4 * len(chart)
    m2 = _hessian_bound(vals.reshape(shape), grads.reshape(shape + (3,)), half, periodic)
    # the S3 chart formula is a smooth covering for any eta, so polishing
    # unbounded avoids stalling on the degenerate circles eta = 0, pi/2
    bnds = [(None, None) if p or model.kind == "S3" else c
            for p, c in zip(periodic, closed)]
    offs = np.array(np.meshgrid(*[[-1.0, 1.0]] * 3, indexing="ij")).reshape(3, -1).T

    def side(sign):
        nonlocal n_evals
        sv = sign * vals
        order = np.argsort(sv, kind="stable")
        best_v, best_x = float(sv[order[0]]), chart[order[0]].copy()

        starts = chart[_basin_starts(sv, shape, periodic, grid.polish)]

        # the starts are polished jointly: the summed objective is separable,
        # so one batched L-BFGS run descends every basin at once
        def fun(c):
            v, g = _chart_eval(model, field, c.reshape(-1, 3))
            return sign * float(v.sum()), sign * g.ravel()

        res = minimize(fun, starts.ravel(), jac=True, method="L-BFGS-B",
                       bounds=bnds * len(starts),
                       options={"maxiter": 60 * len(starts), "gtol": 1e-9, "ftol": 1e-15})
        n_evals += 2 * res.nfev * len(starts)
        ends = np.asarray(res.x).reshape(-1, 3)
        end_vals = sign * _chart_eval(model, field, ends, need_grad=False)[0]
        i = int(np.argmin(end_vals))
        if end_vals[i] < best_v:
            best_v, best_x = float(end_vals[i]), ends[i].copy()
        centers, cvals, cgrads = chart, sv, sign * grads
        hw = half.copy()
        frozen = np.inf
        for level in range(grid.depth + 1):
            r = float(np.linalg.norm(hw))
            floors = cvals - np.linalg.norm(cgrads, axis=1) * r - 0.5 * m2 * r * r
            active = np.flatnonzero(floors < best_v - 1e-12)
            if level == grid.depth or active.size == 0:
                frozen = min(frozen, float(floors.min()))
                break
            inactive = np.ones(len(floors), bool)
            inactive[active] = False
            if inactive.any():
                frozen = min(frozen, float(floors[inactive].min()))
            active = active[np.argsort(floors[active], kind="stable")]
            cap = max(1, grid.max_boxes // 8)
            if active.size > cap:
                frozen = min(frozen, float(floors[active[cap:]].min()))
                active = active[:cap]
            hw = hw / 2
            centers = (centers[active][:, None, :] + offs[None] * hw).reshape(-1, 3)
            cv, cg = _chart_eval(model, field, centers)
            n_evals += 4 * len(centers)
            cvals, cgrads = sign * cv, sign * cg
            i = int(np.argmin(cvals))
            if cvals[i] < best_v:
                best_v, best_x = float(cvals[i]), centers[i].copy()
        err = max(0.0, best_v - min(frozen, best_v))
        if lipschitz is not None:
            err = min(err, float(lipschitz) * 2 * float(np.linalg.norm(hw)))
        return sign * best_v, model.embed(best_x[None, :])[0], err

    nan = (np.nan, None, 0.0)
    vmin, amin, emin = side(1.0) if which in ("both", "min") else nan
    vmax, amax, emax = side(-1.0) if which in ("both", "max") else nan
    if tail is not None:
        if which != "max" and tail < vmin:
            vmin, amin, emin = float(tail), None, 0.0
        if which != "min" and tail > vmax:
            vmax, amax, emax = float(tail), None, 0.0
    return Extremum(vmin, vmax, amin, amax, max(emin, emax), emin, emax, n_evals)

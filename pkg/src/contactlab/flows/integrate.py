"""Fixed-step RK4 integration of contact flows and conformal factors."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..exceptions import ToleranceError


@dataclass
class FlowTrace:
    """Result of :func:`integrate`.

    Attributes
    ----------
    initial : (n, dim) array
    times : (k,) array of stored times
    positions : (k, n, dim) array of stored positions (always includes both ends)
    step : float
    max_drift : float
        Largest per-step renormalization on S3 (0 elsewhere).
    reliable : bool
        False if a J1S1 trajectory left the fiber bounds.
    probes : (3, 2, n, dim) array or None
        Trajectories of ``x +- h v`` for three probe vectors ``v``.
    probe_vectors : (3, n, dim) array or None
    """

    model: object
    initial: np.ndarray
    times: np.ndarray
    positions: np.ndarray
    step: float
    max_drift: float = 0.0
    reliable: bool = True
    probes: Optional[np.ndarray] = None
    probe_vectors: Optional[np.ndarray] = None
    probe_h: float = 1e-4
    notes: list = field(default_factory=list)

    @property
    def final(self):
        return self.positions[-1]


def vector_field(path, t, x):
    """Contact vector field of ``path`` at time ``t``."""
    return path.model.contact_field(x, path.value(t, x), path.grad(t, x))


def integrate(path, points, steps=1000, *, store_every=None, probes=False, probe_h=1e-4,
              fiber_bound=None, apply_start=True):
    """Integrate the flow of ``path`` from ``t = 0`` to ``t = 1`` with classical RK4.

    Parameters
    ----------
    path : HamiltonianPath
    points : (n, dim) array of starting points
    steps : int, at least 100
    store_every : int, optional
        Store every k-th step (default: only the endpoints).
    probes : bool
        Also integrate ``x +- probe_h * v`` for the probe vectors used by
        :func:`conformal_factor`.
    fiber_bound : float, optional
        On J1S1, mark the trace unreliable if ``|p|`` exceeds this bound.
    apply_start : bool
        Apply the path's start map (right translation) first.
    """
    model = path.model
    if steps < 100:
        raise ValueError("at least 100 steps per unit time are required")
    x0 = model.check_points(points)
    if apply_start:
        x0 = path.start_map(x0)
    n = len(x0)
    pv = None
    if probes:
        R = model.reeb(x0)
        basis = model.xi_basis(x0)
        pv = np.stack([R, R + basis[:, 0], R + basis[:, 1]])
        block = [x0]
        for v in pv:
            block += [x0 + probe_h * v, x0 - probe_h * v]
        x = model.project(np.concatenate(block))
    else:
        x = x0.copy()
    h = 1.0 / steps
    stored_t, stored_x = [0.0], [x.copy()]
    drift = 0.0
    reliable = True
    if fiber_bound is None and model.kind == "J1S1":
        fiber_bound = path.support_radius
    for k in range(steps):
        t = k * h
        k1 = vector_field(path, t, x)
        k2 = vector_field(path, t + 0.5 * h, x + 0.5 * h * k1)
        k3 = vector_field(path, t + 0.5 * h, x + 0.5 * h * k2)
        k4 = vector_field(path, t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if model.kind == "S3":
            nrm = np.linalg.norm(x, axis=1)
            drift = max(drift, float(np.max(np.abs(nrm - 1.0))))
            x = x / nrm[:, None]
        if fiber_bound is not None and reliable and np.any(np.abs(x[:, 1]) > fiber_bound * 1.1):
            reliable = False
        if store_every and (k + 1) % store_every == 0 and k + 1 < steps:
            stored_t.append((k + 1) * h)
            stored_x.append(x.copy())
    stored_t.append(1.0)
    stored_x.append(x.copy())
    pos = np.stack(stored_x)
    trace = FlowTrace(model, x0, np.array(stored_t), pos[:, :n], h, drift, reliable,
                      probe_h=probe_h)
    if probes:
        trace.probes = pos[-1, n:].reshape(3, 2, n, -1)
        trace.probe_vectors = pv
    if not reliable:
        trace.notes.append("trajectory left the fiber bounds; results flagged unreliable")
    return trace


def flow_map(path, points, steps=1000, apply_start=True):
    """Time-one image of ``points`` (closed form when available)."""
    pts = path.model.check_points(points)
    start = path.start_map(pts) if apply_start else pts
    closed = path.closed_form_flow(start)
    if closed is not None:
        return closed
    return integrate(path, start, steps, apply_start=False).final


@dataclass
class ConformalFactorField:
    """Samples of ``rho`` with ``phi^* alpha = rho alpha`` at trace points."""

    points: np.ndarray
    values: np.ndarray
    per_probe: np.ndarray
    consistency: float

    @property
    def min(self):
        return float(self.values.min())

    @property
    def max(self):
        return float(self.values.max())

    @property
    def ratio(self):
        return self.max / self.min


def conformal_factor(trace):
    """Conformal factor of the time-one map recorded in ``trace``.

    ``rho(x) = alpha_{phi x}(d phi v) / alpha_x(v)`` with ``d phi v``
    estimated from the central difference of the probe trajectories.  The
    value reported is the mean over the probes ``R + e1`` and ``R + e2``;
    ``consistency`` is the largest spread among all three probes.
    """
    if trace.probes is None:
        raise ValueError("trace was integrated without probes")
    model = trace.model
    x0, x1 = trace.initial, trace.final
    cov1 = model.alpha_covector(x1)
    cov0 = model.alpha_covector(x0)
    rhos = []
    for (plus, minus), v in zip(trace.probes, trace.probe_vectors):
        dphi = model.chart_difference(plus, minus) / (2 * trace.probe_h)
        den = np.einsum("ij,ij->i", cov0, v)
        if np.any(np.abs(den) < 1e-8):
            raise ToleranceError("degenerate probe frame; resample")
        rhos.append(np.einsum("ij,ij->i", cov1, dphi) / den)
    rhos = np.array(rhos)
    vals = 0.5 * (rhos[1] + rhos[2])
    if np.any(vals <= 0):
        raise ToleranceError("non-positive conformal factor sample")
    spread = float(np.max(rhos.max(axis=0) - rhos.min(axis=0)))
    return ConformalFactorField(x0, vals, rhos, spread)

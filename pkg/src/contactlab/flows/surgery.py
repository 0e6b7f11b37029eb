"""Path surgeries: Reeb reparametrization, concatenation, reversal, translation."""

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter1d

from ..exceptions import ToleranceError
from .lengths import default_grid, slice_extrema
from .paths import (ComposedPath, ConcatenatedPath, ReebMotion, ReversedPath,
                    RightTranslatedPath, TimeWarpedPath, reeb_path)
from .time import SplineTime


@dataclass
class ReparametrizationInfo:
    """Diagnostics attached to a reparametrized path."""

    target: float
    delta: float
    mode: str
    width: float
    lipschitz: float
    nodes: np.ndarray
    minima: np.ndarray
    maxima: np.ndarray = None
    check_times: np.ndarray = None
    check_minima: np.ndarray = None
    max_deviation: float = 0.0
    notes: list = field(default_factory=list)


class ReparametrizedPath(ComposedPath):
    """A path composed with a Reeb motion; keeps its construction record."""

    info = None


_MIN_GAP = 1.0 / 4096
_SLOPE_GAP = 1.0 / 1024


def _sample_extrema(path, grid, delta, nodes0, mode, max_nodes):
    """Adaptively sample per-time minima (and maxima in 'mid' mode).

    An interval is bisected while the midpoint value deviates from the
    linear interpolant by more than ``delta / 2``.
    """
    which = "min" if mode == "min" else "both"
    cache = {}

    def ev(t):
        if t not in cache:
            e = slice_extrema(path, t, grid, which)
            cache[t] = (e.min, e.max if mode == "mid" else np.nan)
        return cache[t]

    def key(t):
        lo, hi = ev(t)
        return lo if mode == "min" else 0.5 * (lo + hi)

    nodes = list(np.linspace(0.0, 1.0, nodes0))
    for t in nodes:
        ev(t)
    queue = [(nodes[i], nodes[i + 1]) for i in range(len(nodes) - 1)]
    while queue and len(cache) < max_nodes:
        a, b = queue.pop()
        mid = 0.5 * (a + b)
        lin = 0.5 * (key(a) + key(b))
        if abs(key(mid) - lin) > delta / 2 and b - a > _MIN_GAP:
            queue.append((a, mid))
            queue.append((mid, b))
    ts = np.array(sorted(cache))
    lo = np.array([cache[t][0] for t in ts])
    hi = np.array([cache[t][1] for t in ts])
    return ts, lo, hi


def _smooth_derivative(ts, target_vals, delta):
    """Mollify a piecewise-linear function of time by Gaussian smoothing.

    Returns (knots, values, width, lipschitz).
    """
    # jumps across tiny gaps are extremization noise, not slope
    slopes = np.abs(np.diff(target_vals) / np.maximum(np.diff(ts), _SLOPE_GAP))
    lip = 1.5 * float(slopes.max()) if len(slopes) else 0.0
    width = 0.01 if lip == 0 else min(delta / (4 * lip), 0.01)
    n_fine = int(np.ceil(8.0 / width)) + 1
    fine = np.linspace(0.0, 1.0, n_fine)
    vals = np.interp(fine, ts, target_vals)
    dt = fine[1] - fine[0]
    smooth = gaussian_filter1d(vals, width / dt, mode="reflect", truncate=6.0)
    step = 4  # knots every width/2
    knots = fine[::step]
    if knots[-1] != 1.0:
        knots = np.append(knots, 1.0)
        sm = np.append(smooth[::step], smooth[-1])
    else:
        sm = smooth[::step]
    return knots, sm, width, lip


def reeb_reparametrize(path, target="auto", delta=1e-3, *, mode="min", grid=None,
                       nodes=65, max_nodes=1025, verify=True, check_times=None):
    """Compose ``path`` with a Reeb motion that equalizes per-time minima.

    With ``m(t) = min_M H_t`` and ``eps = int m``, the Reeb time
    ``tau(t)`` solves ``tau' = eps - m`` (mollified), ``tau(0) = tau(1) = 0``,
    and the returned path has Hamiltonian
    ``H'(t, x) = H(t, Reeb_{-tau(t)} x) + tau'(t)``.  Its per-time minima lie
    in ``(eps - delta, eps + delta)`` and its time-one map equals that of
    ``path``.

    In ``mode='mid'`` the centre ``(m + M) / 2`` is equalized instead, which
    is the natural normalization for the norm.

    Parameters
    ----------
    path : HamiltonianPath
    target : 'auto' or float
        The level ``eps``; an explicit value must agree with the computed
        one within ``delta`` because ``tau(1) = 0`` forces it.
    delta : float
    mode : {'min', 'mid'}
    grid : GridSpec, optional
    verify : bool
        Re-extremize ``H'`` on ``check_times`` (default: the endpoints and
        the midpoints of the initial nodes, where interpolation is weakest)
        and raise :class:`ToleranceError` if the band is missed.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if mode not in ("min", "mid"):
        raise ValueError("mode must be 'min' or 'mid'")
    model = path.model
    grid = default_grid(model, path.support_radius) if grid is None else grid

    if path.spatially_constant:
        exact = path.profile_integral()
        if exact is None:
            ts = np.linspace(0.0, 1.0, 1025)
            vals = np.array([path.profile(t) for t in ts])
            exact = float(np.trapezoid(vals, ts))
        _check_target(target, exact, delta)
        out = reeb_path(model, exact)
        out.info = ReparametrizationInfo(exact, delta, mode, 0.0, 0.0,
                                         np.array([0.0, 1.0]), np.array([exact, exact]),
                                         notes=["spatially constant: exact constant witness"])
        return _with_start(out, path)

    ts, lo, hi = _sample_extrema(path, grid, delta, nodes, mode, max_nodes)
    key = lo if mode == "min" else 0.5 * (lo + hi)
    level = float(np.trapezoid(key, ts))
    _check_target(target, level, delta)
    knots, smooth, width, lip = _smooth_derivative(ts, key, delta)
    tau = SplineTime(knots, level - smooth)
    tau = SplineTime(knots, level - smooth, offset=float(tau._spline.integrate(0.0, 1.0)))
    out = ReparametrizedPath(ReebMotion(model, tau), path)
    info = ReparametrizationInfo(level, delta, mode, width, lip, ts, lo,
                                 hi if mode == "mid" else None)
    out.info = info
    if verify:
        if check_times is None:
            tc = np.concatenate([[0.0], (np.arange(nodes - 1) + 0.5) / (nodes - 1), [1.0]])
        else:
            tc = np.asarray(check_times)
        which = "min" if mode == "min" else "both"
        got = []
        for t in tc:
            e = slice_extrema(out, t, grid, which)
            got.append(e.min if mode == "min" else 0.5 * (e.min + e.max))
        got = np.array(got)
        info.check_times, info.check_minima = tc, got
        info.max_deviation = float(np.max(np.abs(got - level)))
        if info.max_deviation >= delta:
            raise ToleranceError(
                f"per-time levels deviate by {info.max_deviation:.3e} >= delta={delta:g}; "
                f"refine the grid (current counts {grid.counts}) or raise delta")
    return out


def _check_target(target, level, delta):
    if isinstance(target, str):
        if target != "auto":
            raise ValueError("target must be 'auto' or a number")
        return
    if abs(float(target) - level) > delta:
        raise ToleranceError(
            f"target {target!r} is incompatible with fixed endpoints (level {level:.6g})")


def _with_start(new, old):
    return RightTranslatedPath(new, old.start_map) if old.has_start_map else new


def concatenate(first, second):
    """Concatenate two paths; Lorentzian and Shelukhin lengths add exactly."""
    return ConcatenatedPath(first, second)


def reverse(path):
    """``H(t, x) -> -H(1 - t, x)``."""
    return ReversedPath(path)


def time_warp(path, warp=None):
    """Orientation-preserving reparametrization of time."""
    return TimeWarpedPath(path, warp)


def right_translate(path, chi=None):
    """Compose the endpoints of ``path`` with ``chi`` on the right.

    The Hamiltonian is unchanged; only the start map of the flow changes.
    ``chi`` is a callable on point arrays (for instance a closed-form flow).
    """
    if chi is None:
        return path
    return RightTranslatedPath(path, chi)

"""Lorentzian and Shelukhin length functionals of a single path."""

from dataclasses import dataclass

import numpy as np

from ..manifolds import GridSpec, extremize


def default_grid(model, support_radius=None, n=None, depth=1):
    """Grid used by the length functionals unless one is supplied."""
    if model.kind in ("T3", "STR2"):
        n = 20 if n is None else n
        return GridSpec((n, n, n), depth=depth, max_boxes=2048, polish=1)
    if model.kind == "J1S1":
        n = 32 if n is None else n
        R = 1.25 * (support_radius if support_radius else 2.0)
        return GridSpec((n, n + 1, 2), bounds=(None, (-R, R), (-1.0, 1.0)),
                        depth=depth, max_boxes=2048, polish=1)
    n = 24 if n is None else n
    return GridSpec((n // 2, n, n), depth=depth, max_boxes=2048, polish=2)


@dataclass
class LengthResult:
    """Quadrature value with error bound and the per-node data."""

    value: float
    error_bound: float
    times: np.ndarray
    samples: np.ndarray
    sample_errors: np.ndarray
    quadrature_error: float

    def __iter__(self):
        return iter((self.value, self.error_bound))


def simpson_weights(n):
    if n % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * n)


def slice_extrema(path, t, grid=None, which="both", rho=None):
    """Extremum of ``H_t`` (or ``rho H_t``) over the model."""
    grid = default_grid(path.model, path.support_radius) if grid is None else grid
    return extremize(path.model, path.field(t, rho), grid, which=which)


def _quadrature(times_vals, errs, n):
    w = simpson_weights(n)
    value = float(w @ times_vals)
    coarse = float(simpson_weights(n // 2) @ times_vals[::2]) if n % 4 == 0 else value
    quad_err = abs(value - coarse) / 15.0
    return value, quad_err, quad_err + float(w @ errs)


def _length(path, grid, n_t, rho, kind):
    times = np.linspace(0.0, 1.0, n_t + 1)
    vals = np.empty(n_t + 1)
    errs = np.empty(n_t + 1)
    const = path.spatially_constant and rho is None
    for i, t in enumerate(times):
        if const:
            c = float(path.profile(t))
            vals[i] = c if kind == "min" else abs(c)
            errs[i] = 0.0
            continue
        which = "min" if kind == "min" else "both"
        ext = slice_extrema(path, t, grid, which, rho)
        if kind == "min":
            vals[i], errs[i] = ext.min, ext.min_error
        else:
            lo, hi = abs(ext.min), abs(ext.max)
            vals[i] = max(lo, hi)
            errs[i] = ext.min_error if lo > hi else ext.max_error
    if const:
        exact = path.profile_integral()
        if exact is not None and (kind == "min" or np.all(vals >= 0) or np.all(vals <= 0)):
            # spatially constant with known integral: use the exact value
            if kind == "min":
                return LengthResult(float(exact), 0.0, times, vals, errs, 0.0)
            const_signed = np.array([path.profile(t) for t in times])
            if np.all(const_signed >= 0) or np.all(const_signed <= 0):
                return LengthResult(abs(float(exact)), 0.0, times, vals, errs, 0.0)
    value, qerr, total = _quadrature(vals, errs, n_t)
    return LengthResult(value, total, times, vals, errs, qerr)


def lorentz_length(path, grid=None, n_t=64, rho=None):
    """``int_0^1 min_M H_t dt`` by composite Simpson quadrature.

    The error bound adds a Richardson estimate of the quadrature error to
    the Simpson-weighted extremization errors.  With ``rho`` the lengths are
    measured for the form ``rho * alpha``.

    Examples
    --------
    >>> from contactlab.manifolds import ContactModel
    >>> from contactlab.flows import reeb_path
    >>> lorentz_length(reeb_path(ContactModel("T3"), 0.7)).value
    0.7
    """
    return _length(path, grid, n_t, rho, "min")


def shelukhin_length(path, grid=None, n_t=64, rho=None):
    """``int_0^1 max_M |H_t| dt`` by composite Simpson quadrature."""
    return _length(path, grid, n_t, rho, "max")

"""Scalar functions of time used by paths and motions."""

from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * np.pi


def smoothstep(u):
    """Quintic smoothstep ``10u^3 - 15u^4 + 6u^5`` clamped to [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u))


def smoothstep_prime(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    return np.where(inside, 30.0 * u * u * (1.0 - u) ** 2, 0.0)


@lru_cache(maxsize=64)
def _cardinal(j, n):
    nodes = np.linspace(0.0, 1.0, n)
    vals = np.zeros(n)
    vals[j] = 1.0
    return CubicSpline(nodes, vals)


class TimeProfile:
    """Time factor of a basis term.

    ``kind`` is one of

    - ``'poly'``: ``sum_k params[k] t^k``
    - ``'sin'`` / ``'cos'``: ``sin(2 pi k t)`` / ``cos(2 pi k t)`` with ``params = (k,)``
    - ``'spline'``: cardinal cubic spline ``j`` on ``n`` uniform nodes, ``params = (j, n)``
    """

    kinds = ("poly", "sin", "cos", "spline")

    def __init__(self, kind, params=(1.0,)):
        if kind not in self.kinds:
            raise ValueError(f"unknown time profile {kind!r}")
        self.kind = kind
        self.params = tuple(float(p) for p in params)
        if kind in ("sin", "cos") and len(self.params) != 1:
            raise ValueError("sin/cos profiles take one frequency")
        if kind == "spline":
            j, n = int(self.params[0]), int(self.params[1])
            if not 0 <= j < n or n < 2:
                raise ValueError("spline profile needs 0 <= j < n, n >= 2")

    def __eq__(self, other):
        return isinstance(other, TimeProfile) and (self.kind, self.params) == (other.kind, other.params)

    def __hash__(self):
        return hash((self.kind, self.params))

    def __repr__(self):
        return f"TimeProfile({self.kind!r}, {self.params})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "poly":
            return np.polynomial.polynomial.polyval(t, self.params)
        if self.kind == "sin":
            return np.sin(TWO_PI * self.params[0] * t)
        if self.kind == "cos":
            return np.cos(TWO_PI * self.params[0] * t)
        return _cardinal(int(self.params[0]), int(self.params[1]))(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "poly":
            return np.polynomial.polynomial.polyval(
                t, np.polynomial.polynomial.polyder(self.params))
        w = TWO_PI * (self.params[0] if self.kind != "spline" else 0.0)
        if self.kind == "sin":
            return w * np.cos(w * t)
        if self.kind == "cos":
            return -w * np.sin(w * t)
        return _cardinal(int(self.params[0]), int(self.params[1]))(t, 1)

    def integral(self):
        """Exact integral over [0, 1]."""
        if self.kind == "poly":
            return float(sum(c / (k + 1) for k, c in enumerate(self.params)))
        if self.kind == "sin":
            return 0.0
        if self.kind == "cos":
            return 1.0 if self.params[0] == 0 else 0.0
        return float(_cardinal(int(self.params[0]), int(self.params[1])).integrate(0.0, 1.0))

    def tokens(self):
        return [self.kind] + [_fmt(p) for p in self.params]

    @classmethod
    def from_tokens(cls, tokens):
        kind = tokens[0]
        nparams = {"sin": 1, "cos": 1, "spline": 2}.get(kind)
        if nparams is None:
            # poly: all remaining numeric tokens
            return cls(kind, [float(x) for x in tokens[1:]]), len(tokens)
        return cls(kind, [float(x) for x in tokens[1:1 + nparams]]), 1 + nparams


def _fmt(x):
    return repr(float(x))


class TimeFunction:
    """A function of time with derivative, used to drive motions.

    Subclasses implement ``value`` and ``derivative`` and serialize via
    ``to_spec`` / :func:`time_function_from_spec`.
    """

    def __call__(self, t):
        return self.value(t)


class LinearTime(TimeFunction):
    """``tau(t) = rate * t``."""

    def __init__(self, rate):
        self.rate = float(rate)

    def value(self, t):
        return self.rate * np.asarray(t, dtype=float)

    def derivative(self, t):
        return np.full(np.shape(t), self.rate)

    def to_spec(self):
        return {"kind": "linear", "rate": self.rate}


class FourierLoop(TimeFunction):
    """Vector-valued loop ``v(t)`` with ``v(0) = v(1) = 0``.

    ``v'(t) = sum_j a_j cos(2 pi j t) + b_j sin(2 pi j t)`` for ``j >= 1``,
    so ``v`` is periodic and mean-free derivatives integrate to zero.
    ``coeffs`` has shape (n_modes, 2, dim_out).
    """

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 2:
            c = c[:, :, None]
        if c.ndim != 3 or c.shape[1] != 2:
            raise ValueError("coeffs must have shape (n_modes, 2, dim)")
        self.coeffs = c
        self.freqs = TWO_PI * np.arange(1, len(c) + 1)

    @property
    def dim(self):
        return self.coeffs.shape[2]

    def value(self, t):
        t = np.asarray(t, dtype=float)
        w = self.freqs
        s = np.sin(np.multiply.outer(t, w)) / w
        c = (1.0 - np.cos(np.multiply.outer(t, w))) / w
        return s @ self.coeffs[:, 0, :] + c @ self.coeffs[:, 1, :]

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        arg = np.multiply.outer(t, self.freqs)
        return np.cos(arg) @ self.coeffs[:, 0, :] + np.sin(arg) @ self.coeffs[:, 1, :]

    def to_spec(self):
        return {"kind": "fourier-loop", "coeffs": self.coeffs.tolist()}


class SplineTime(TimeFunction):
    """Antiderivative of a cubic spline ``tau'`` sampled on ``knots``.

    ``offset`` is subtracted from ``tau'`` so that the integral over
    [0, 1] can be fixed exactly.
    """

    def __init__(self, knots, values, offset=0.0):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.offset = float(offset)
        self._spline = CubicSpline(self.knots, self.values - self.offset)
        self._anti = self._spline.antiderivative()

    def value(self, t):
        return self._anti(np.clip(t, 0.0, 1.0))

    def derivative(self, t):
        return self._spline(np.clip(t, 0.0, 1.0))

    def to_spec(self):
        return {"kind": "spline", "knots": self.knots.tolist(),
                "values": self.values.tolist(), "offset": self.offset}


class ProfileTime(TimeFunction):
    """Antiderivative ``tau(t) = int_0^t g`` of a spatially constant profile ``g``.

    Built from a callable; not serializable except through its owner.
    """

    def __init__(self, func, deriv):
        self._f = func
        self._df = deriv

    def value(self, t):
        return self._f(t)

    def derivative(self, t):
        return self._df(t)


def time_function_from_spec(spec):
    kind = spec["kind"]
    if kind == "linear":
        return LinearTime(spec["rate"])
    if kind == "fourier-loop":
        return FourierLoop(spec["coeffs"])
    if kind == "spline":
        return SplineTime(spec["knots"], spec["values"], spec.get("offset", 0.0))
    raise ValueError(f"unknown time function {kind!r}")

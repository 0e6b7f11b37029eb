"""Spatial basis functions for Hamiltonian paths."""

import numpy as np


class Mode:
    """One spatial basis function ``B(x)`` with analytic gradient.

    ``kind`` and ``params``:

    - ``'const'``: ``B = 1`` (any model)
    - ``'fourier'``: ``(kx, ky, kth, phase)`` on T3/STR2,
      ``cos`` (phase 0) or ``sin`` (phase 1) of ``kx x + ky y + kth theta``
    - ``'jet'``: ``(k, phase, n, R)`` on J1S1, ``trig(k q) * b_n(p)`` with
      ``b_n(p) = p^n (1 - (p/R)^2)^4`` for ``|p| < R`` and 0 outside
    - ``'mono'``: ``(a, b, c, d)`` on S3, ``x1^a y1^b x2^c y2^d``
    """

    kinds = {"const": 0, "fourier": 4, "jet": 4, "mono": 4}
    models = {"const": None, "fourier": ("T3", "STR2"), "jet": ("J1S1",), "mono": ("S3",)}

    def __init__(self, kind, params=()):
        if kind not in self.kinds:
            raise ValueError(f"unknown mode kind {kind!r}")
        if len(params) != self.kinds[kind]:
            raise ValueError(f"mode {kind!r} takes {self.kinds[kind]} parameters")
        self.kind = kind
        self.params = tuple(float(p) for p in params)
        if kind == "jet" and self.params[3] <= 0:
            raise ValueError("jet mode radius must be positive")

    def key(self):
        return (self.kind, self.params)

    def __eq__(self, other):
        return isinstance(other, Mode) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Mode({self.kind!r}, {self.params})"

    def check_model(self, model):
        allowed = self.models[self.kind]
        if allowed is not None and model.kind not in allowed:
            raise ValueError(f"mode {self.kind!r} not available on {model.kind}")

    @property
    def support_radius(self):
        return self.params[3] if self.kind == "jet" else None

    @property
    def compact(self):
        """True if the mode vanishes outside a fiber-compact set (J1S1)."""
        return self.kind == "jet"

    def value(self, x):
        if self.kind == "const":
            return np.ones(len(x))
        if self.kind == "fourier":
            kx, ky, kt, ph = self.params
            arg = kx * x[:, 0] + ky * x[:, 1] + kt * x[:, 2]
            return np.sin(arg) if ph else np.cos(arg)
        if self.kind == "jet":
            k, ph, n, R = self.params
            trig = np.sin(k * x[:, 0]) if ph else np.cos(k * x[:, 0])
            return trig * _bump(x[:, 1], int(n), R)[0]
        a, b, c, d = (int(v) for v in self.params)
        return x[:, 0] ** a * x[:, 1] ** b * x[:, 2] ** c * x[:, 3] ** d

    def gradient(self, x):
        n_pts = len(x)
        if self.kind == "const":
            return np.zeros_like(x)
        if self.kind == "fourier":
            kx, ky, kt, ph = self.params
            arg = kx * x[:, 0] + ky * x[:, 1] + kt * x[:, 2]
            d = np.cos(arg) if ph else -np.sin(arg)
            return np.stack([kx * d, ky * d, kt * d], axis=1)
        if self.kind == "jet":
            k, ph, n, R = self.params
            q = x[:, 0]
            trig = np.sin(k * q) if ph else np.cos(k * q)
            dtrig = k * np.cos(k * q) if ph else -k * np.sin(k * q)
            b, db = _bump(x[:, 1], int(n), R)
            return np.stack([dtrig * b, trig * db, np.zeros(n_pts)], axis=1)
        e = [int(v) for v in self.params]
        out = np.zeros_like(x)
        for i in range(4):
            if e[i] == 0:
                continue
            ee = list(e)
            ee[i] -= 1
            out[:, i] = e[i] * x[:, 0] ** ee[0] * x[:, 1] ** ee[1] * x[:, 2] ** ee[2] * x[:, 3] ** ee[3]
        return out

    def tokens(self):
        return [self.kind] + [repr(p) for p in self.params]

    @classmethod
    def from_tokens(cls, tokens):
        kind = tokens[0]
        n = cls.kinds.get(kind)
        if n is None:
            raise ValueError(f"unknown mode kind {kind!r}")
        return cls(kind, [float(v) for v in tokens[1:1 + n]]), 1 + n


def _bump(p, n, R):
    """``p^n (1 - (p/R)^2)^4`` on ``|p| < R`` and its derivative."""
    s = p / R
    inside = np.abs(s) < 1.0
    w = np.where(inside, 1.0 - s * s, 0.0)
    pn = p ** n
    dpn = n * p ** (n - 1) if n > 0 else np.zeros_like(p)
    val = pn * w ** 4
    der = dpn * w ** 4 + pn * 4 * w ** 3 * (-2.0 * p / (R * R))
    return np.where(inside, val, 0.0), np.where(inside, der, 0.0)

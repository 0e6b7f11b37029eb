"""
Paths of contactomorphisms represented by time-dependent contact Hamiltonians.

Every path lives on ``t in [0, 1]`` and exposes ``value(t, x)`` and the
ambient spatial gradient ``grad(t, x)``.  :class:`BasisPath` is the
serializable finite-basis representation; the other classes are exact
surgeries on existing paths.
"""

import numpy as np

from ..manifolds import ScalarField
from .modes import Mode
from .time import (FourierLoop, LinearTime, TimeFunction, TimeProfile, smoothstep,
                   smoothstep_prime, time_function_from_spec)


class HamiltonianPath:
    """Base class: a contact Hamiltonian ``H(t, x)`` on ``[0, 1] x M``."""

    model = None

    def value(self, t, x):
        raise NotImplementedError

    def grad(self, t, x):
        raise NotImplementedError

    def dt(self, t, x, h=1e-6):
        """Time derivative by central differences (exact where overridden)."""
        lo, hi = max(0.0, t - h), min(1.0, t + h)
        return (self.value(hi, x) - self.value(lo, x)) / (hi - lo)

    def tail(self, t):
        """Value outside the fiber support on J1S1, else ``None``."""
        return None

    @property
    def support_radius(self):
        return None

    @property
    def spatially_constant(self):
        return False

    def profile(self, t):
        """``H(t)`` for spatially constant paths."""
        raise ValueError("path is not spatially constant")

    def profile_integral(self):
        """Exact ``int_0^1 H dt`` for spatially constant paths when known."""
        return None

    def closed_form_flow(self, x):
        """Time-one map in closed form, or ``None`` when unavailable."""
        return None

    def start_map(self, x):
        """Map applied to points before the flow (right translation)."""
        return x

    @property
    def has_start_map(self):
        return False

    def field(self, t, rho=None):
        """The slice ``H_t`` as a :class:`ScalarField`.

        If ``rho`` is given the field is ``rho * H_t``: the Hamiltonian of the
        same path measured with the form ``rho * alpha``.
        """
        t = float(t)
        if self.spatially_constant and rho is None:
            c = float(self.profile(t))
            f = ScalarField.constant_field(c, self.model.dim)
            return f
        tail = self.tail(t)
        if rho is None:
            return ScalarField(lambda x: self.value(t, x), lambda x: self.grad(t, x),
                               tail=tail, support_radius=self.support_radius)

        def func(x):
            return rho(x) * self.value(t, x)

        def grad(x):
            return (rho(x)[:, None] * self.grad(t, x)
                    + self.value(t, x)[:, None] * rho.gradient(x))
        rtail = None if tail is None else tail * (rho.tail if rho.tail is not None else np.nan)
        return ScalarField(func, grad, tail=rtail, support_radius=self.support_radius)

    def to_spec(self):
        raise NotImplementedError(f"{type(self).__name__} is not serializable")


class BasisPath(HamiltonianPath):
    """``H(t, x) = sum coeff * T(t) * B(x)`` over basis terms.

    Parameters
    ----------
    model : ContactModel
    terms : list of (coeff, TimeProfile, Mode)
    """

    def __init__(self, model, terms):
        self.model = model
        groups = {}
        for coeff, prof, mode in terms:
            if not isinstance(prof, TimeProfile) or not isinstance(mode, Mode):
                raise TypeError("terms must be (coeff, TimeProfile, Mode) triples")
            mode.check_model(model)
            if model.kind == "J1S1" and mode.kind not in ("const", "jet"):
                raise ValueError("J1S1 paths use 'const' and 'jet' modes")
            groups.setdefault(mode, []).append((float(coeff), prof))
        self.terms = [(float(c), p, m) for c, p, m in terms]
        self._groups = list(groups.items())

    def coefficients(self, t):
        return [(mode, sum(c * float(p(t)) for c, p in lst)) for mode, lst in self._groups]

    def value(self, t, x):
        out = np.zeros(len(x))
        for mode, c in self.coefficients(t):
            if c != 0.0:
                out += c * mode.value(x)
        return out

    def grad(self, t, x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for mode, c in self.coefficients(t):
            if c != 0.0 and mode.kind != "const":
                out += c * mode.gradient(x)
        return out

    def dt(self, t, x, h=None):
        out = np.zeros(len(x))
        for mode, lst in self._groups:
            c = sum(cf * float(p.derivative(t)) for cf, p in lst)
            if c != 0.0:
                out += c * mode.value(x)
        return out

    def _const_coeff(self, t):
        for mode, c in self.coefficients(t):
            if mode.kind == "const":
                return c
        return 0.0

    def tail(self, t):
        if self.model.kind != "J1S1":
            return None
        return self._const_coeff(t)

    @property
    def support_radius(self):
        radii = [m.support_radius for m, _ in self._groups if m.support_radius]
        return max(radii) if radii else None

    @property
    def spatially_constant(self):
        return all(m.kind == "const" for m, _ in self._groups)

    def profile(self, t):
        if not self.spatially_constant:
            raise ValueError("path is not spatially constant")
        return self._const_coeff(t)

    def profile_integral(self):
        if not self.spatially_constant:
            return None
        return float(sum(c * p.integral() for c, p, _ in self.terms))

    def mode_integrals(self):
        out = {}
        for mode, lst in self._groups:
            out[mode] = sum(c * p.integral() for c, p in lst)
        return out

    def closed_form_flow(self, x):
        """Exact time-one map for Reeb plus translation Hamiltonians.

        Supported: spatially constant paths on any model, and on T3/STR2
        combinations of ``1``, ``cos(theta)``, ``sin(theta)``.
        """
        ints = self.mode_integrals()
        sig = self.model.sigma
        if self.spatially_constant:
            return self.model.reeb_flow(x, self.profile_integral())
        if self.model.kind not in ("T3", "STR2"):
            return None
        c = a = b = 0.0
        for mode, val in ints.items():
            if mode.kind == "const":
                c = val
            elif mode.kind == "fourier" and mode.params[:3] == (0.0, 0.0, 1.0):
                if mode.params[3]:
                    b = val
                else:
                    a = val
            else:
                return None
        out = self.model.reeb_flow(x, c)
        out[:, 0] += a / sig
        out[:, 1] += b / sig
        return out

    def to_spec(self):
        return {"kind": "basis",
                "terms": [[c, p.tokens(), m.tokens()] for c, p, m in self.terms]}


def reeb_path(model, c=1.0):
    """Spatially constant Hamiltonian ``H = c``: the Reeb flow for time ``c``."""
    return BasisPath(model, [(c, TimeProfile("poly", (1.0,)), Mode("const"))])


def profile_path(model, poly):
    """Spatially constant ``H(t) = sum poly[k] t^k``."""
    return BasisPath(model, [(1.0, TimeProfile("poly", poly), Mode("const"))])


def translation_path(model, a, b, c=0.0):
    """Base translation by ``(a, b)`` combined with Reeb time ``c`` (T3/STR2)."""
    if model.kind not in ("T3", "STR2"):
        raise ValueError("translations exist on T3 and STR2 only")
    s = model.sigma
    one = TimeProfile("poly", (1.0,))
    terms = [(s * a, one, Mode("fourier", (0, 0, 1, 0))),
             (s * b, one, Mode("fourier", (0, 0, 1, 1)))]
    if c:
        terms.append((c, one, Mode("const")))
    return BasisPath(model, terms)


def zero_path(model):
    return BasisPath(model, [])


# -- strict motions --------------------------------------------------------

class Motion:
    """A strict contact isotopy ``lambda_t`` with closed-form flow."""

    def hamiltonian(self, t, x):
        raise NotImplementedError

    def ham_grad(self, t, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def is_loop(self, tol=1e-12):
        raise NotImplementedError


class ReebMotion(Motion):
    """``lambda_t = Reeb flow for time tau(t)``; Hamiltonian ``tau'(t)``."""

    kind = "reeb"

    def __init__(self, model, tau):
        self.model = model
        self.tau = tau

    def apply(self, t, x):
        return self.model.reeb_flow(x, float(self.tau(t)))

    def inverse(self, t, x):
        return self.model.reeb_flow(x, -float(self.tau(t)))

    def hamiltonian(self, t, x):
        return np.full(len(x), float(self.tau.derivative(t)))

    def pullback_grad(self, t, x, g):
        return self.model.reeb_flow_jacobian_T(x, -float(self.tau(t)), g)

    def is_loop(self, tol=1e-12):
        end = float(self.tau(1.0))
        per = self.model.reeb_period
        if per is not None:
            end = end - per * np.round(end / per)
        return abs(end) <= tol

    def to_spec(self):
        return {"kind": "reeb", "tau": self.tau.to_spec()}


class TranslationMotion(Motion):
    """Base translation by ``v(t)`` on T3/STR2 (strict)."""

    kind = "translation"

    def __init__(self, model, v):
        if model.kind not in ("T3", "STR2"):
            raise ValueError("translation motions need T3 or STR2")
        self.model = model
        self.v = v

    def _shift(self, t):
        return np.asarray(self.v(t), dtype=float).reshape(2)

    def apply(self, t, x):
        out = np.array(x, dtype=float, copy=True)
        out[:, :2] += self._shift(t)
        return out

    def inverse(self, t, x):
        out = np.array(x, dtype=float, copy=True)
        out[:, :2] -= self._shift(t)
        return out

    def hamiltonian(self, t, x):
        d = np.asarray(self.v.derivative(t), dtype=float).reshape(2)
        th = x[:, 2]
        return self.model.sigma * (d[0] * np.cos(th) + d[1] * np.sin(th))

    def ham_grad(self, t, x):
        d = np.asarray(self.v.derivative(t), dtype=float).reshape(2)
        th = x[:, 2]
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[:, 2] = self.model.sigma * (-d[0] * np.sin(th) + d[1] * np.cos(th))
        return out

    def pullback_grad(self, t, x, g):
        return g

    def is_loop(self, tol=1e-12):
        return bool(np.all(np.abs(self._shift(1.0)) <= tol))

    def to_spec(self):
        return {"kind": "translation", "v": self.v.to_spec()}


class TorusMotion(Motion):
    """``diag(exp(i a(t)), exp(i b(t)))`` acting on S3 (strict)."""

    kind = "torus"

    def __init__(self, model, ab):
        if model.kind != "S3":
            raise ValueError("torus motions need S3")
        self.model = model
        self.ab = ab

    def _angles(self, t):
        return np.asarray(self.ab(t), dtype=float).reshape(2)

    @staticmethod
    def _rotate(x, a, b):
        out = np.empty_like(x)
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        out[:, 0] = ca * x[:, 0] - sa * x[:, 1]
        out[:, 1] = sa * x[:, 0] + ca * x[:, 1]
        out[:, 2] = cb * x[:, 2] - sb * x[:, 3]
        out[:, 3] = sb * x[:, 2] + cb * x[:, 3]
        return out

    def apply(self, t, x):
        a, b = self._angles(t)
        return self._rotate(np.asarray(x, dtype=float), a, b)

    def inverse(self, t, x):
        a, b = self._angles(t)
        return self._rotate(np.asarray(x, dtype=float), -a, -b)

    def hamiltonian(self, t, x):
        da, db = np.asarray(self.ab.derivative(t), dtype=float).reshape(2)
        return self.model.sigma * (da * (x[:, 0] ** 2 + x[:, 1] ** 2)
                                   + db * (x[:, 2] ** 2 + x[:, 3] ** 2))

    def ham_grad(self, t, x):
        da, db = np.asarray(self.ab.derivative(t), dtype=float).reshape(2)
        s = 2.0 * self.model.sigma
        return np.stack([s * da * x[:, 0], s * da * x[:, 1],
                         s * db * x[:, 2], s * db * x[:, 3]], axis=1)

    def pullback_grad(self, t, x, g):
        a, b = self._angles(t)
        return self._rotate(np.asarray(g, dtype=float), a, b)

    def is_loop(self, tol=1e-12):
        ang = self._angles(1.0)
        red = ang - 2 * np.pi * np.round(ang / (2 * np.pi))
        return bool(np.all(np.abs(red) <= tol))

    def to_spec(self):
        return {"kind": "torus", "ab": self.ab.to_spec()}


def motion_from_spec(model, spec):
    kind = spec["kind"]
    if kind == "reeb":
        return ReebMotion(model, time_function_from_spec(spec["tau"]))
    if kind == "translation":
        return TranslationMotion(model, time_function_from_spec(spec["v"]))
    if kind == "torus":
        return TorusMotion(model, time_function_from_spec(spec["ab"]))
    raise ValueError(f"unknown motion {kind!r}")


class ComposedPath(HamiltonianPath):
    """``psi_t = lambda_t o phi_t`` for a strict motion ``lambda``.

    Since ``lambda_t`` preserves the form, ``H_psi = H_lambda + H_phi o lambda_t^{-1}``.
    """

    def __init__(self, motion, inner):
        if motion.model != inner.model:
            raise ValueError("motion and path live on different models")
        self.model = inner.model
        self.motion = motion
        self.inner = inner

    def value(self, t, x):
        y = self.motion.inverse(t, x)
        return self.motion.hamiltonian(t, x) + self.inner.value(t, y)

    def grad(self, t, x):
        y = self.motion.inverse(t, x)
        return self.motion.ham_grad(t, x) + self.motion.pullback_grad(t, x, self.inner.grad(t, y))

    def tail(self, t):
        it = self.inner.tail(t)
        if it is None:
            return None
        if isinstance(self.motion, ReebMotion):
            return it + float(self.motion.tau.derivative(t))
        return None

    @property
    def support_radius(self):
        return self.inner.support_radius

    @property
    def spatially_constant(self):
        return isinstance(self.motion, ReebMotion) and self.inner.spatially_constant

    def profile(self, t):
        return float(self.motion.tau.derivative(t)) + self.inner.profile(t)

    def profile_integral(self):
        inner = self.inner.profile_integral()
        if inner is None or not self.spatially_constant:
            return None
        return inner + float(self.motion.tau(1.0)) - float(self.motion.tau(0.0))

    def start_map(self, x):
        return self.inner.start_map(x)

    @property
    def has_start_map(self):
        return self.inner.has_start_map

    def to_spec(self):
        return {"kind": "compose", "motion": self.motion.to_spec(), "inner": self.inner.to_spec()}


class ConcatenatedPath(HamiltonianPath):
    """Run ``first`` on [0, 1/2] and ``second`` on [1/2, 1], each time-warped.

    The warps are quintic smoothsteps, so the Hamiltonian vanishes to
    second order at ``t = 1/2`` and the concatenation is smooth.  The
    second half is right-translated by the first path's endpoint, which
    leaves its Hamiltonian untouched.
    """

    def __init__(self, first, second):
        if first.model != second.model:
            raise ValueError("cannot concatenate paths on different models")
        self.model = first.model
        self.first = first
        self.second = second

    def _half(self, t):
        if t < 0.5:
            u = 2.0 * t
            return self.first, float(smoothstep(u)), 2.0 * float(smoothstep_prime(u))
        u = 2.0 * t - 1.0
        return self.second, float(smoothstep(u)), 2.0 * float(smoothstep_prime(u))

    def value(self, t, x):
        p, s, ds = self._half(t)
        if ds == 0.0:
            return np.zeros(len(x))
        return ds * p.value(s, x)

    def grad(self, t, x):
        p, s, ds = self._half(t)
        if ds == 0.0:
            return np.zeros_like(np.asarray(x, dtype=float))
        return ds * p.grad(s, x)

    def tail(self, t):
        p, s, ds = self._half(t)
        tl = p.tail(s)
        return None if tl is None else ds * tl

    @property
    def support_radius(self):
        r = [p.support_radius for p in (self.first, self.second) if p.support_radius]
        return max(r) if r else None

    @property
    def spatially_constant(self):
        return self.first.spatially_constant and self.second.spatially_constant

    def profile(self, t):
        p, s, ds = self._half(t)
        return ds * p.profile(s) if ds else 0.0

    def profile_integral(self):
        a, b = self.first.profile_integral(), self.second.profile_integral()
        return None if a is None or b is None else a + b

    def start_map(self, x):
        return self.first.start_map(x)

    @property
    def has_start_map(self):
        return self.first.has_start_map

    def to_spec(self):
        return {"kind": "concat", "first": self.first.to_spec(), "second": self.second.to_spec()}


class ReversedPath(HamiltonianPath):
    """``H(t, x) -> -H(1 - t, x)``: runs the flow backwards."""

    def __init__(self, inner):
        self.model = inner.model
        self.inner = inner

    def value(self, t, x):
        return -self.inner.value(1.0 - t, x)

    def grad(self, t, x):
        return -self.inner.grad(1.0 - t, x)

    def tail(self, t):
        tl = self.inner.tail(1.0 - t)
        return None if tl is None else -tl

    @property
    def support_radius(self):
        return self.inner.support_radius

    @property
    def spatially_constant(self):
        return self.inner.spatially_constant

    def profile(self, t):
        return -self.inner.profile(1.0 - t)

    def profile_integral(self):
        v = self.inner.profile_integral()
        return None if v is None else -v

    def to_spec(self):
        return {"kind": "reverse", "inner": self.inner.to_spec()}


class TimeWarpedPath(HamiltonianPath):
    """``H(t, x) -> w'(t) H(w(t), x)`` for an increasing warp ``w`` of [0, 1].

    ``warp`` is a :class:`TimeFunction`; the default is the quintic smoothstep.
    """

    def __init__(self, inner, warp=None):
        self.model = inner.model
        self.inner = inner
        self.warp = warp

    def _w(self, t):
        if self.warp is None:
            return float(smoothstep(t)), float(smoothstep_prime(t))
        return float(self.warp(t)), float(self.warp.derivative(t))

    def value(self, t, x):
        w, dw = self._w(t)
        return dw * self.inner.value(w, x)

    def grad(self, t, x):
        w, dw = self._w(t)
        return dw * self.inner.grad(w, x)

    def tail(self, t):
        w, dw = self._w(t)
        tl = self.inner.tail(w)
        return None if tl is None else dw * tl

    @property
    def support_radius(self):
        return self.inner.support_radius

    @property
    def spatially_constant(self):
        return self.inner.spatially_constant

    def profile(self, t):
        w, dw = self._w(t)
        return dw * self.inner.profile(w)

    def profile_integral(self):
        return self.inner.profile_integral()

    def start_map(self, x):
        return self.inner.start_map(x)

    @property
    def has_start_map(self):
        return self.inner.has_start_map

    def to_spec(self):
        return {"kind": "warp", "warp": None if self.warp is None else self.warp.to_spec(),
                "inner": self.inner.to_spec()}


class RightTranslatedPath(HamiltonianPath):
    """Same Hamiltonian as ``inner``; the flow starts from ``chi(x)``."""

    def __init__(self, inner, chi):
        self.model = inner.model
        self.inner = inner
        self.chi = chi

    def value(self, t, x):
        return self.inner.value(t, x)

    def grad(self, t, x):
        return self.inner.grad(t, x)

    def dt(self, t, x, h=1e-6):
        return self.inner.dt(t, x, h)

    def tail(self, t):
        return self.inner.tail(t)

    @property
    def support_radius(self):
        return self.inner.support_radius

    @property
    def spatially_constant(self):
        return self.inner.spatially_constant

    def profile(self, t):
        return self.inner.profile(t)

    def profile_integral(self):
        return self.inner.profile_integral()

    def start_map(self, x):
        return self.chi(self.inner.start_map(x))

    @property
    def has_start_map(self):
        return True

    def to_spec(self):
        return self.inner.to_spec()


def path_from_spec(model, spec):
    kind = spec["kind"]
    if kind == "basis":
        terms = []
        for c, ptoks, mtoks in spec["terms"]:
            prof, _ = TimeProfile.from_tokens(ptoks)
            mode, _ = Mode.from_tokens(mtoks)
            terms.append((c, prof, mode))
        return BasisPath(model, terms)
    if kind == "compose":
        return ComposedPath(motion_from_spec(model, spec["motion"]),
                            path_from_spec(model, spec["inner"]))
    if kind == "concat":
        return ConcatenatedPath(path_from_spec(model, spec["first"]),
                                path_from_spec(model, spec["second"]))
    if kind == "reverse":
        return ReversedPath(path_from_spec(model, spec["inner"]))
    if kind == "warp":
        warp = spec.get("warp")
        return TimeWarpedPath(path_from_spec(model, spec["inner"]),
                              None if warp is None else time_function_from_spec(warp))
    raise ValueError(f"unknown path kind {kind!r}")


__all__ = [
    "HamiltonianPath", "BasisPath", "ComposedPath", "ConcatenatedPath", "ReversedPath",
    "TimeWarpedPath", "RightTranslatedPath", "ReebMotion", "TranslationMotion",
    "TorusMotion", "Motion", "reeb_path", "profile_path", "translation_path", "zero_path",
    "path_from_spec", "motion_from_spec", "FourierLoop", "LinearTime", "TimeFunction",
]

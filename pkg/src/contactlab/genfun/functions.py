"""
Generating functions quadratic at infinity on ``S^1 x R^m``.

A :class:`GenFun` is a one-parameter family

    S_t(q, e) = sum_i Q_i e_i^2 + sum_terms coeff * T(t) * C(q) * prod_j E_j(e_j)

with time factors ``T`` in {1, t, t^2, sin(pi t / 2)}, circle factors ``C``
in {1, cos kq, sin kq} and fiber factors ``E`` in {1, M_n}.  The moments
``M_n(e) = int_0^e chi(s) s^n ds`` use a smooth even cutoff ``chi`` equal to
1 on ``[-r0, r0]`` and 0 outside ``[-r1, r1]``, so every term is independent
of ``e`` for ``|e| >= r1``: the family is quadratic at infinity with
support radius ``r1``.  A single generating function is the family at
``t = 1``.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial

TIME_KINDS = ("one", "t", "t2", "sin")


class Cutoff:
    """Even C^2 cutoff: 1 on ``|s| <= r0``, quintic decay to 0 at ``|s| = r1``."""

    def __init__(self, r0=2.0, r1=3.0):
        if not 0 < r0 < r1:
            raise ValueError("cutoff radii must satisfy 0 < r0 < r1")
        self.r0, self.r1 = float(r0), float(r1)
        w = self.r1 - self.r0
        u = Polynomial([-self.r0 / w, 1.0 / w])
        step = Polynomial([0, 0, 0, 10.0, -15.0, 6.0])
        self.ramp = 1.0 - step(u)

    def __call__(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        return np.where(a <= self.r0, 1.0, np.where(a >= self.r1, 0.0, self.ramp(a)))

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        inside = (a > self.r0) & (a < self.r1)
        return np.where(inside, np.sign(s) * self.ramp.deriv()(a), 0.0)

    @lru_cache(maxsize=16)
    def moment_pieces(self, n):
        """Polynomials giving ``M_n`` on [0, r0] and [r0, r1] and its tail value."""
        core = Polynomial.basis(n).integ()
        ramp = (self.ramp * Polynomial.basis(n)).integ(lbnd=self.r0, k=core(self.r0))
        return core, ramp, float(ramp(self.r1))

    def __eq__(self, other):
        return isinstance(other, Cutoff) and (self.r0, self.r1) == (other.r0, other.r1)

    def __hash__(self):
        return hash((self.r0, self.r1))


def moment(cut, n, e, deriv=0):
    """``M_n(e)`` and its derivatives (``deriv`` in 0, 1, 2)."""
    e = np.asarray(e, dtype=float)
    if deriv == 1:
        return cut(e) * e ** n
    if deriv == 2:
        base = cut.derivative(e) * e ** n
        if n > 0:
            base = base + n * cut(e) * e ** (n - 1)
        return base
    core, ramp, tail = cut.moment_pieces(n)
    a = np.abs(e)
    val = np.where(a <= cut.r0, core(a), np.where(a >= cut.r1, tail, ramp(a)))
    # M_n(-e) = (-1)^(n+1) M_n(e)
    return np.where(e < 0, (-1.0) ** (n + 1) * val, val)


class Term:
    """``coeff * T(t) * C(q) * prod_j E_j(e_j)``.

    Parameters
    ----------
    coeff : float
    time : {'one', 't', 't2', 'sin'}
    circle : tuple
        ``('one',)``, ``('cos', k)`` or ``('sin', k)``.
    fiber : tuple of tuples
        One entry per fiber variable: ``('one',)`` or ``('moment', n)``.
    """

    def __init__(self, coeff, time="one", circle=("one",), fiber=()):
        if time not in TIME_KINDS:
            raise ValueError(f"unknown time factor {time!r}")
        if circle[0] not in ("one", "cos", "sin"):
            raise ValueError(f"unknown circle factor {circle!r}")
        for f in fiber:
            if f[0] not in ("one", "moment"):
                raise ValueError(f"unknown fiber factor {f!r}")
        self.coeff = float(coeff)
        self.time = time
        self.circle = (circle[0],) + tuple(int(v) for v in circle[1:])
        self.fiber = tuple((f[0],) + tuple(int(v) for v in f[1:]) for f in fiber)

    def time_value(self, t, deriv=0):
        if self.time == "one":
            return 1.0 if deriv == 0 else 0.0
        if self.time == "t":
            return t if deriv == 0 else 1.0
        if self.time == "t2":
            return t * t if deriv == 0 else 2 * t
        w = 0.5 * np.pi
        return np.sin(w * t) if deriv == 0 else w * np.cos(w * t)

    def circle_value(self, q, deriv=0):
        kind = self.circle[0]
        if kind == "one":
            return np.ones_like(q) if deriv == 0 else np.zeros_like(q)
        k = self.circle[1]
        if kind == "cos":
            return np.cos(k * q) if deriv == 0 else -k * np.sin(k * q)
        return np.sin(k * q) if deriv == 0 else k * np.cos(k * q)

    def fiber_value(self, j, cut, e, deriv=0):
        f = self.fiber[j] if j < len(self.fiber) else ("one",)
        if f[0] == "one":
            return np.ones_like(e) if deriv == 0 else np.zeros_like(e)
        return moment(cut, f[1], e, deriv)

    @property
    def uses_fiber(self):
        return any(f[0] != "one" for f in self.fiber)

    def tokens(self):
        parts = [repr(self.coeff), self.time, ":", " ".join(map(str, self.circle))]
        for f in self.fiber:
            parts += [":", " ".join(map(str, f))]
        return " ".join(parts)


class GenFun:
    """A family ``S_t = Q + f_t`` of generating functions on ``S^1 x R^m``.

    Parameters
    ----------
    q_diag : sequence of float
        Diagonal of the nondegenerate quadratic form ``Q``; ``m = len(q_diag)``.
    terms : list of Term
    cutoff : Cutoff, optional
    name : str, optional
    """

    def __init__(self, q_diag, terms=(), cutoff=None, name=""):
        self.q_diag = np.asarray(q_diag, dtype=float).reshape(-1)
        if np.any(self.q_diag == 0):
            raise ValueError("Q must be nondegenerate")
        self.m = len(self.q_diag)
        if self.m > 2:
            raise ValueError("fiber dimension must be 0, 1 or 2")
        self.terms = list(terms)
        for term in self.terms:
            if len(term.fiber) > self.m:
                raise ValueError("term has more fiber factors than fiber variables")
        self.cutoff = Cutoff() if cutoff is None else cutoff
        self.name = name

    @property
    def index(self):
        """Number of negative directions of ``Q``."""
        return int(np.sum(self.q_diag < 0))

    @property
    def support_radius(self):
        """Radius beyond which ``f`` does not depend on ``e``."""
        return self.cutoff.r1 if any(t.uses_fiber for t in self.terms) else 0.0

    def _prep(self, q, e):
        q = np.asarray(q, dtype=float).reshape(-1)
        e = np.asarray(e, dtype=float).reshape(len(q), self.m) if self.m else np.zeros((len(q), 0))
        return q, e

    def _fiber_prod(self, term, e, skip=None, deriv_at=None, deriv=1, second=None):
        out = np.ones(len(e))
        for j in range(self.m):
            if j == skip:
                continue
            d = 0
            if j == deriv_at:
                d = deriv
            if second is not None and j in second:
                d = 1 if deriv_at != j else 2
            out = out * term.fiber_value(j, self.cutoff, e[:, j], d)
        return out

    def value(self, q, e, t=1.0):
        q, e = self._prep(q, e)
        out = (e * e) @ self.q_diag if self.m else np.zeros(len(q))
        for term in self.terms:
            out = out + term.coeff * term.time_value(t) * term.circle_value(q) * \
                self._fiber_prod(term, e)
        return out

    def f_value(self, q, e, t=1.0):
        q, e = self._prep(q, e)
        return self.value(q, e, t) - ((e * e) @ self.q_diag if self.m else 0.0)

    def d_q(self, q, e, t=1.0):
        q, e = self._prep(q, e)
        out = np.zeros(len(q))
        for term in self.terms:
            out = out + term.coeff * term.time_value(t) * term.circle_value(q, 1) * \
                self._fiber_prod(term, e)
        return out

    def d_t(self, q, e, t=1.0):
        q, e = self._prep(q, e)
        out = np.zeros(len(q))
        for term in self.terms:
            out = out + term.coeff * term.time_value(t, 1) * term.circle_value(q) * \
                self._fiber_prod(term, e)
        return out

    def d_e(self, q, e, t=1.0):
        """Fiber gradient, shape (n, m)."""
        q, e = self._prep(q, e)
        out = 2.0 * e * self.q_diag
        for term in self.terms:
            base = term.coeff * term.time_value(t) * term.circle_value(q)
            for j in range(self.m):
                out[:, j] += base * self._fiber_prod(term, e, deriv_at=j)
        return out

    def d_ee(self, q, e, t=1.0):
        """Fiber Hessian, shape (n, m, m)."""
        q, e = self._prep(q, e)
        out = np.zeros((len(q), self.m, self.m))
        for j in range(self.m):
            out[:, j, j] = 2.0 * self.q_diag[j]
        for term in self.terms:
            base = term.coeff * term.time_value(t) * term.circle_value(q)
            for j in range(self.m):
                for k in range(self.m):
                    if j == k:
                        out[:, j, j] += base * self._fiber_prod(term, e, deriv_at=j, deriv=2)
                    else:
                        prod = np.ones(len(q))
                        for i in range(self.m):
                            d = 1 if i in (j, k) else 0
                            prod = prod * term.fiber_value(i, self.cutoff, e[:, i], d)
                        out[:, j, k] += base * prod
        return out

    def d_qe(self, q, e, t=1.0):
        """Mixed derivative ``d_q d_e S``, shape (n, m)."""
        q, e = self._prep(q, e)
        out = np.zeros((len(q), self.m))
        for term in self.terms:
            base = term.coeff * term.time_value(t) * term.circle_value(q, 1)
            for j in range(self.m):
                out[:, j] += base * self._fiber_prod(term, e, deriv_at=j)
        return out

    def shifted(self, c):
        """``S + c`` (constant added at every time)."""
        return GenFun(self.q_diag, self.terms + [Term(c)], self.cutoff, self.name)

    def stabilized(self, coeff=1.0):
        """Add an inert fiber variable with ``Q' = Q + coeff e'^2``."""
        if self.m >= 2:
            raise ValueError("already at maximal fiber dimension")
        terms = [Term(t.coeff, t.time, t.circle, t.fiber + (("one",),) * (self.m + 1 - len(t.fiber)))
                 for t in self.terms]
        return GenFun(np.append(self.q_diag, coeff), terms, self.cutoff, self.name)

    def at_time(self, t):
        """Freeze the family at time ``t`` (returns a constant-in-time family)."""
        terms = [Term(term.coeff * term.time_value(t), "one", term.circle, term.fiber)
                 for term in self.terms]
        return GenFun(self.q_diag, terms, self.cutoff, self.name)

    def f_bounds(self, t=1.0, n_q=256, n_e=65):
        """Sampled range of ``f_t`` over its support region."""
        R = max(self.support_radius, 1e-9)
        qs = np.linspace(0, 2 * np.pi, n_q, endpoint=False)
        if self.m == 0:
            v = self.f_value(qs, np.zeros((n_q, 0)), t)
            return float(v.min()), float(v.max())
        axes = [qs] + [np.linspace(-R, R, n_e)] * self.m
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.m + 1)
        v = self.f_value(mesh[:, 0], mesh[:, 1:], t)
        return float(v.min()), float(v.max())

    def to_text(self):
        lines = ["contactlab-genfun 1", f"name {self.name or '-'}",
                 "Q " + " ".join(repr(float(v)) for v in self.q_diag),
                 f"cutoff {self.cutoff.r0!r} {self.cutoff.r1!r}",
                 f"rsupp {self.support_radius!r}"]
        lines += ["term " + t.tokens() for t in self.terms]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        """Parse the format written by :meth:`to_text`.

        Format::

            contactlab-genfun 1
            name <identifier or ->
            Q <q_1> [<q_2>]
            cutoff <r0> <r1>
            rsupp <value>            # informational, recomputed on load
            term <coeff> <time> : <circle> [: <fiber_1> [: <fiber_2>]]
        """
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or lines[0] != "contactlab-genfun 1":
            raise ValueError("missing 'contactlab-genfun 1' header")
        name, q_diag, cut, terms = "", None, None, []
        for ln in lines[1:]:
            head, _, rest = ln.partition(" ")
            if head == "name":
                name = "" if rest == "-" else rest
            elif head == "Q":
                q_diag = [float(v) for v in rest.split()]
            elif head == "cutoff":
                r0, r1 = (float(v) for v in rest.split())
                cut = Cutoff(r0, r1)
            elif head == "rsupp":
                continue
            elif head == "term":
                parts = [p.split() for p in rest.split(":")]
                coeff, time = float(parts[0][0]), parts[0][1]
                circle = tuple([parts[1][0]] + [int(v) for v in parts[1][1:]])
                fiber = tuple(tuple([p[0]] + [int(v) for v in p[1:]]) for p in parts[2:])
                terms.append(Term(coeff, time, circle, fiber))
            else:
                raise ValueError(f"unknown line {ln!r}")
        if q_diag is None:
            raise ValueError("missing Q line")
        return cls(q_diag, terms, cut, name)


def jet_genfun(f_terms, q_coeff=1.0, name=""):
    """``S = f(q) + q_coeff e^2`` for a trigonometric polynomial ``f``.

    ``f_terms`` is a list of ``(coeff, circle)`` pairs.
    """
    return GenFun([q_coeff], [Term(c, "one", circ) for c, circ in f_terms], name=name)


def trig_poly_terms(const, cos_coeffs, sin_coeffs):
    """Terms of ``const + sum a_k cos kq + b_k sin kq``."""
    out = [(float(const), ("one",))] if const else []
    for k, (a, b) in enumerate(zip(cos_coeffs, sin_coeffs), start=1):
        if a:
            out.append((float(a), ("cos", k)))
        if b:
            out.append((float(b), ("sin", k)))
    return out

"""Closed-form generating-function families starting at the zero section."""

from .functions import Cutoff, GenFun, Term


def reeb_family(index=0):
    """``S_t = Q + t``: the zero section pushed by the Reeb flow."""
    q = 1.0 if index == 0 else -0.5
    return GenFun([q], [Term(1.0, "t")], name=f"reeb-q{index}")


def jet_family(f_terms, time="t", index=0, name=""):
    """``S_t = Q + T(t) f(q)`` for a trigonometric polynomial ``f``."""
    q = 1.0 if index == 0 else -0.5
    return GenFun([q], [Term(c, time, circ) for c, circ in f_terms], name=name)


def translation_family(a, b, c=0.0):
    """Hodograph image of the origin fiber under the translation ``(a, b)`` and Reeb time ``c``."""
    terms = [Term(a, "t", ("cos", 1)), Term(b, "t", ("sin", 1))]
    if c:
        terms.append(Term(c, "t"))
    return GenFun([1.0], terms, name="translation-hodograph")


def fishtail_family(b=1.0, d=0.3, shift=0.0, cutoff=None):
    """A family with folds, ``m = 1`` and a negative direction.

    ``S_t = -e^2/2 + t (-M_3 + (1 + b cos q) M_1 + d sin q M_0) + shift t``,
    so that on the core ``|e| <= r0``
    ``d_e S_1 = -e^3 + b cos q e + d sin q``: three fiber-critical points
    where ``b cos q`` is large, one where it is negative.
    """
    cut = Cutoff(2.0, 3.0) if cutoff is None else cutoff
    terms = [Term(-1.0, "t", ("one",), (("moment", 3),)),
             Term(1.0, "t", ("one",), (("moment", 1),)),
             Term(b, "t", ("cos", 1), (("moment", 1),)),
             Term(d, "t", ("sin", 1), (("moment", 0),))]
    if shift:
        terms.append(Term(shift, "t"))
    return GenFun([-0.5], terms, cut, name="fishtail-m1")


def shipped_families():
    """Name -> GenFun for every family in the library (at least ten)."""
    mixed = [(0.5, ("one",)), (0.8, ("cos", 1)), (-0.3, ("sin", 2))]
    fams = {
        "reeb-q0": reeb_family(0),
        "reeb-q1": reeb_family(1),
        "jet-cos": jet_family([(1.0, ("cos", 1))], name="jet-cos"),
        "jet-mixed": jet_family(mixed, name="jet-mixed"),
        "jet-quadratic-time": jet_family([(0.6, ("sin", 1)), (0.2, ("one",))], "t2",
                                         name="jet-quadratic-time"),
        "jet-sine-time": jet_family([(0.5, ("one",)), (0.4, ("cos", 3))], "sin",
                                    name="jet-sine-time"),
        "jet-q1": jet_family([(0.2, ("one",)), (1.0, ("cos", 1))], index=1, name="jet-q1"),
        "translation-hodograph": translation_family(0.6, 0.2, 0.3),
        "fishtail-m1": fishtail_family(),
        "fishtail-m1-shifted": fishtail_family(0.8, 0.2, shift=0.5),
        "jet-mixed-m2": jet_family(mixed, name="jet-mixed-m2").stabilized(),
        "fishtail-m2": fishtail_family().stabilized(),
    }
    for name, S in fams.items():
        S.name = name
    return fams

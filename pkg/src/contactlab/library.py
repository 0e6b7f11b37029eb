"""Inventory of shipped paths, generating-function families and spacetimes."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .flows import BasisPath, Mode, TimeProfile, reeb_path, translation_path
from .genfun import shipped_families
from .manifolds import ContactModel
from .spacetime import ProductSpacetime

SPACETIME_MODEL = "RxT2"


@dataclass(frozen=True)
class LibraryEntry:
    """One shipped object: stable ``id``, category, model and a builder."""

    id: str
    category: str
    model: str
    description: str
    provenance: str
    build: Callable

    def to_dict(self):
        return {"id": self.id, "category": self.category, "model": self.model,
                "description": self.description, "provenance": self.provenance}


def _one():
    return TimeProfile("poly", (1.0,))


def _t3_mixed(model):
    return BasisPath(model, [(1.0, _one(), Mode("const")),
                             (0.3, _one(), Mode("fourier", (1, 0, 0, 0))),
                             (0.2, TimeProfile("sin", (1,)), Mode("fourier", (0, 0, 1, 1)))])


def _s3_mono(model):
    return BasisPath(model, [(1.0, _one(), Mode("const")),
                             (0.3, _one(), Mode("mono", (1, 1, 0, 0)))])


def _paths():
    T3 = ContactModel("T3")
    S3 = ContactModel("S3")
    return [
        LibraryEntry("reeb", "path", "T3", "Reeb flow H = 1 for unit time",
                     "closed-form flow; calibration case", lambda: reeb_path(T3, 1.0)),
        LibraryEntry("t3-translation", "path", "T3",
                     "base translation by (0.5, 0.25) with Reeb time 0.1",
                     "closed-form flow", lambda: translation_path(T3, 0.5, 0.25, 0.1)),
        LibraryEntry("t3-mixed", "path", "T3",
                     "H = 1 + 0.3 cos x + 0.2 sin(2 pi t) sin theta, positive",
                     "synthetic test path", lambda: _t3_mixed(T3)),
        LibraryEntry("s3-reeb-period", "path", "S3", "Reeb flow for one full period 2 pi",
                     "closed-form periodic flow; positive loop",
                     lambda: reeb_path(S3, S3.reeb_period)),
        LibraryEntry("s3-mono", "path", "S3", "H = 1 + 0.3 x1 y1, positive",
                     "synthetic test path", lambda: _s3_mono(S3)),
    ]


_FAMILY_NOTES = {
    "reeb": "closed form S = Q + t; spectral values known exactly",
    "jet": "1-jet of a trigonometric polynomial; spectral values are min/max of f",
    "translation": "hodograph image of a transported fiber; closed form",
    "fishtail": "synthetic family with folds and cutoff moments",
}


def _families():
    out = []
    for name in shipped_families():
        key = next(k for k in _FAMILY_NOTES if name.startswith(k))
        m = 2 if name.endswith("-m2") else 1
        out.append(LibraryEntry(
            name, "genfun", "J1S1", f"generating-function family from Q, fiber dimension {m}",
            _FAMILY_NOTES[key], lambda name=name: shipped_families()[name]))
    return out


def _spacetimes():
    return [
        LibraryEntry("flat-cylinder-T2", "spacetime", SPACETIME_MODEL,
                     "flat R x T2; skies and distances in closed form",
                     "closed-form geodesics", lambda: ProductSpacetime()),
        LibraryEntry("conformal-cylinder-T2", "spacetime", SPACETIME_MODEL,
                     "R x T2 with h = exp(0.6 cos x) (dx^2 + dy^2)",
                     "synthetic conformal metric; numerical geodesics",
                     lambda: ProductSpacetime([(0.3, 1, 0, 0)])),
    ]


def library():
    """All entries, ordered by category then id."""
    entries = _paths() + _families() + _spacetimes()
    order = {"path": 0, "genfun": 1, "spacetime": 2}
    return sorted(entries, key=lambda e: (order[e.category], e.id))


FILTER_KEYS = ("id", "category", "model")


def list_library(filters=None):
    """Entries matching every ``key=value`` in ``filters``.

    Raises
    ------
    KeyError
        For a filter key outside :data:`FILTER_KEYS`.
    """
    filters = dict(filters or {})
    bad = sorted(set(filters) - set(FILTER_KEYS))
    if bad:
        raise KeyError(f"unknown filter key(s) {bad}; allowed: {list(FILTER_KEYS)}")
    return [e for e in library() if all(getattr(e, k) == v for k, v in filters.items())]


def get_entry(entry_id):
    for e in library():
        if e.id == entry_id:
            return e
    raise KeyError(f"no library entry {entry_id!r}")


def random_path(model, seed, n_terms=3, amplitude=0.5, positive=False):
    """Seeded random basis path with smooth time profiles.

    The spatial modes are low-frequency Fourier modes (T3/STR2), jet modes
    (J1S1) or monomials of degree at most two (S3).  With ``positive`` a
    constant term exceeding the sum of the other amplitudes is added.
    """
    rng = np.random.default_rng(seed)
    terms = []
    total = 0.0
    for _ in range(n_terms):
        if model.kind in ("T3", "STR2"):
            k = rng.integers(-1, 2, size=3)
            if not k.any():
                k[2] = 1
            mode = Mode("fourier", (*k, rng.integers(0, 2)))
        elif model.kind == "J1S1":
            mode = Mode("jet", (rng.integers(0, 3), rng.integers(0, 2), rng.integers(0, 2), 2.0))
        else:
            deg = rng.multinomial(rng.integers(1, 3), [0.25] * 4)
            mode = Mode("mono", tuple(deg))
        kind = rng.choice(["poly", "sin", "cos"])
        if kind == "poly":
            prof = TimeProfile("poly", tuple(rng.uniform(-1, 1, 2)))
            peak = np.abs(prof.params).sum()
        else:
            prof = TimeProfile(kind, (int(rng.integers(1, 3)),))
            peak = 1.0
        c = float(rng.uniform(-amplitude, amplitude))
        total += abs(c) * peak
        terms.append((c, prof, mode))
    if positive:
        bound = total
        if model.kind == "J1S1":
            bound *= 4.0
        terms.append((bound + 0.1 + float(rng.uniform(0, 0.5)), _one(), Mode("const")))
    return BasisPath(model, terms)

"""
Plain-text serialization of Hamiltonian paths.

Format (one token list per line, ``#`` starts a comment)::

    contactlab-path 1
    model <kind> <sign> <scale>
    <node>

where ``<node>`` is one of::

    basis
    term <coeff> <time profile tokens> : <mode tokens>
    ...
    end

    compose
    motion <reeb|translation|torus> <time function tokens>
    <node>
    end

    concat / reverse / warp <none | time function tokens>
    <node> [<node>]
    end

Time profiles: ``poly c0 c1 ...``, ``sin k``, ``cos k``, ``spline j n``.
Modes: ``const``, ``fourier kx ky kth phase``, ``jet k phase n R``,
``mono a b c d``.  Time functions: ``linear rate``,
``fourier-loop n_modes dim <coeffs...>``,
``spline n offset <knots...> <values...>``.
Numbers are written with ``repr`` so a round trip is exact; the decimal
separator is always ``.``.
"""

import numpy as np

from ..manifolds import ContactModel
from .paths import path_from_spec

HEADER = "contactlab-path 1"


def _num(x):
    return repr(float(x))


def _tf_tokens(spec):
    kind = spec["kind"]
    if kind == "linear":
        return ["linear", _num(spec["rate"])]
    if kind == "fourier-loop":
        c = np.asarray(spec["coeffs"], dtype=float)
        return ["fourier-loop", str(c.shape[0]), str(c.shape[2])] + [_num(v) for v in c.ravel()]
    if kind == "spline":
        k = spec["knots"]
        return (["spline", str(len(k)), _num(spec.get("offset", 0.0))]
                + [_num(v) for v in k] + [_num(v) for v in spec["values"]])
    raise ValueError(f"unknown time function {kind!r}")


def _tf_from_tokens(tok):
    kind = tok[0]
    if kind == "linear":
        return {"kind": "linear", "rate": float(tok[1])}
    if kind == "fourier-loop":
        n, d = int(tok[1]), int(tok[2])
        vals = np.array([float(v) for v in tok[3:3 + 2 * n * d]])
        return {"kind": "fourier-loop", "coeffs": vals.reshape(n, 2, d).tolist()}
    if kind == "spline":
        n = int(tok[1])
        off = float(tok[2])
        vals = [float(v) for v in tok[3:3 + 2 * n]]
        return {"kind": "spline", "offset": off, "knots": vals[:n], "values": vals[n:]}
    raise ValueError(f"unknown time function {kind!r}")


def _emit(spec, out):
    kind = spec["kind"]
    if kind == "basis":
        out.append("basis")
        for c, ptok, mtok in spec["terms"]:
            out.append(" ".join(["term", _num(c)] + list(ptok) + [":"] + list(mtok)))
        out.append("end")
    elif kind == "compose":
        m = spec["motion"]
        tf = m.get("tau") or m.get("v") or m.get("ab")
        out.append("compose")
        out.append(" ".join(["motion", m["kind"]] + _tf_tokens(tf)))
        _emit(spec["inner"], out)
        out.append("end")
    elif kind == "concat":
        out.append("concat")
        _emit(spec["first"], out)
        _emit(spec["second"], out)
        out.append("end")
    elif kind == "reverse":
        out.append("reverse")
        _emit(spec["inner"], out)
        out.append("end")
    elif kind == "warp":
        w = spec.get("warp")
        out.append(" ".join(["warp"] + (["none"] if w is None else _tf_tokens(w))))
        _emit(spec["inner"], out)
        out.append("end")
    else:
        raise ValueError(f"cannot serialize node {kind!r}")


def dumps_path(path):
    """Serialize a path to the documented text format."""
    m = path.model
    lines = [HEADER, f"model {m.kind} {m.sign} {_num(m.scale)}"]
    _emit(path.to_spec(), lines)
    return "\n".join(lines) + "\n"


def _parse(lines, i):
    tok = lines[i]
    head = tok[0]
    if head == "basis":
        terms = []
        i += 1
        while lines[i][0] != "end":
            t = lines[i]
            if t[0] != "term" or ":" not in t:
                raise ValueError(f"malformed term line: {' '.join(t)}")
            sep = t.index(":")
            terms.append([float(t[1]), t[2:sep], t[sep + 1:]])
            i += 1
        return {"kind": "basis", "terms": terms}, i + 1
    if head == "compose":
        mt = lines[i + 1]
        if mt[0] != "motion":
            raise ValueError("compose block must start with a motion line")
        key = {"reeb": "tau", "translation": "v", "torus": "ab"}[mt[1]]
        motion = {"kind": mt[1], key: _tf_from_tokens(mt[2:])}
        inner, i = _parse(lines, i + 2)
        _expect_end(lines, i)
        return {"kind": "compose", "motion": motion, "inner": inner}, i + 1
    if head == "concat":
        a, i = _parse(lines, i + 1)
        b, i = _parse(lines, i)
        _expect_end(lines, i)
        return {"kind": "concat", "first": a, "second": b}, i + 1
    if head == "reverse":
        a, i = _parse(lines, i + 1)
        _expect_end(lines, i)
        return {"kind": "reverse", "inner": a}, i + 1
    if head == "warp":
        w = None if tok[1] == "none" else _tf_from_tokens(tok[1:])
        a, i = _parse(lines, i + 1)
        _expect_end(lines, i)
        return {"kind": "warp", "warp": w, "inner": a}, i + 1
    raise ValueError(f"unknown block {head!r}")


def _expect_end(lines, i):
    if i >= len(lines) or lines[i][0] != "end":
        raise ValueError("missing 'end'")


def loads_path(text):
    """Parse the text format produced by :func:`dumps_path`."""
    lines = []
    for raw in text.splitlines():
        raw = raw.split("#", 1)[0].strip()
        if raw:
            lines.append(raw.split())
    if not lines or " ".join(lines[0]) != HEADER:
        raise ValueError("missing 'contactlab-path 1' header")
    m = lines[1]
    if m[0] != "model":
        raise ValueError("second line must declare the model")
    model = ContactModel(m[1], int(m[2]), float(m[3]))
    spec, i = _parse(lines, 2)
    if i != len(lines):
        raise ValueError("trailing content after path")
    return path_from_spec(model, spec)


def save_path(path, filename):
    with open(filename, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_path(path))


def load_path(filename):
    with open(filename, encoding="utf-8") as fh:
        return loads_path(fh.read())

"""Independent reference computations used to freeze expected values.

None of these call into the code paths they check: the Reeb fields come
from a symbolic linear solve, conformal factors from finite differences of
the flow map, sublevel homology from dense GF(2) linear algebra, and
fishtail critical points from polynomial roots.
"""

from itertools import product

import numpy as np
import sympy as sp

TWO_PI = 2 * np.pi


# -- Reeb fields by symbolic solve ----------------------------------------------------

def _forms(kind):
    if kind in ("T3", "STR2"):
        x, y, th = sp.symbols("x y theta", real=True)
        X = [x, y, th]
        a = [sp.cos(th), sp.sin(th), 0]
        return X, a, None
    if kind == "J1S1":
        q, p, z = sp.symbols("q p z", real=True)
        return [q, p, z], [-p, 0, 1], None
    x1, y1, x2, y2 = sp.symbols("x1 y1 x2 y2", real=True)
    X = [x1, y1, x2, y2]
    return X, [-y1, x1, -y2, x2], x1 ** 2 + y1 ** 2 + x2 ** 2 + y2 ** 2


def reeb_oracle(kind):
    """Callable ``points -> R(points)`` for the standard form, from a symbolic solve.

    Solves ``alpha(R) = 1`` and ``i_R d alpha = mu dF`` (``F`` the sphere
    equation on S3, absent elsewhere) with ``R`` tangent to ``F = 1``.
    """
    X, a, F = _forms(kind)
    n = len(X)
    R = sp.symbols(f"r0:{n}", real=True)
    da = sp.Matrix(n, n, lambda i, j: sp.diff(a[j], X[i]) - sp.diff(a[i], X[j]))
    eqs = [sum(a[i] * R[i] for i in range(n)) - 1]
    contr = [sum(R[i] * da[i, j] for i in range(n)) for j in range(n)]
    unknowns = list(R)
    if F is not None:
        mu = sp.Symbol("mu", real=True)
        unknowns.append(mu)
        dF = [sp.diff(F, v) for v in X]
        contr = [c - mu * d for c, d in zip(contr, dF)]
        eqs.append(sum(R[i] * dF[i] for i in range(n)))
    eqs += contr
    sol = sp.solve(eqs, unknowns, dict=True)[0]
    exprs = [sp.simplify(sol[r].subs(F, 1) if F is not None else sol[r]) for r in R]
    if F is not None:
        exprs = [sp.simplify(e.subs(X[0] ** 2 + X[1] ** 2 + X[2] ** 2 + X[3] ** 2, 1))
                 for e in exprs]
    f = sp.lambdify(X, exprs, "numpy")

    def field(points):
        pts = np.atleast_2d(points)
        cols = f(*pts.T)
        return np.column_stack([np.broadcast_to(np.asarray(c, float), (len(pts),))
                                for c in cols])
    return field


# -- conformal factor by finite differences ------------------------------------------

def conformal_factor_fd(path, points, h=1e-5, steps=1000):
    """``rho(x) = alpha_{phi x}(d phi R_x)`` with ``d phi`` from central differences."""
    from contactlab.flows import flow_map
    model = path.model
    pts = np.atleast_2d(points)
    R = model.reeb(pts)
    plus = model.project(pts + h * R)
    minus = model.project(pts - h * R)
    fp = flow_map(path, plus, steps)
    fm = flow_map(path, minus, steps)
    dphi = model.chart_difference(fp, fm) / (2 * h)
    img = flow_map(path, pts, steps)
    cov = model.alpha_covector(img)
    den = np.einsum("ij,ij->i", model.alpha_covector(pts), R)
    return np.einsum("ij,ij->i", cov, dphi) / den


# -- brute-force GF(2) sublevel homology -------------------------------------------------

def gf2_rank(M):
    M = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        piv = np.nonzero(M[rank:, c])[0]
        if len(piv) == 0:
            continue
        p = rank + piv[0]
        M[[rank, p]] = M[[p, rank]]
        hit = np.nonzero(M[:, c])[0]
        hit = hit[hit != rank]
        M[hit] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_nullspace(M):
    """Basis (as columns) of the kernel of ``M`` over GF(2)."""
    M = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = M.shape
    pivots, r = [], 0
    for c in range(cols):
        piv = np.nonzero(M[r:, c])[0] if r < rows else []
        if len(piv) == 0:
            continue
        p = r + piv[0]
        M[[r, p]] = M[[p, r]]
        hit = np.nonzero(M[:, c])[0]
        hit = hit[hit != r]
        M[hit] ^= M[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.uint8)
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = M[i, f]
        basis.append(v)
    return np.array(basis, dtype=np.uint8).T if basis else np.zeros((cols, 0), np.uint8)


def cubical_cells(vals):
    """Cells of the cubical grid (axis 0 periodic) with max-vertex filtration values.

    Returns ``cells[k] = list of (value, frozenset of vertex indices)`` and
    boundary matrices ``bd[k]`` from k-cells to (k-1)-cells.
    """
    shape = vals.shape
    d = len(shape)
    cells = {k: [] for k in range(d + 1)}
    index = {k: {} for k in range(d + 1)}
    for base in product(*[range(n) for n in shape]):
        for mask in product((0, 1), repeat=d):
            if any(b and base[ax] == shape[ax] - 1 and ax != 0 for ax, b in enumerate(mask)):
                continue
            verts = []
            for corner in product(*[(0, 1) if b else (0,) for b in mask]):
                v = list(base[ax] + corner[ax] for ax in range(d))
                v[0] %= shape[0]
                verts.append(tuple(v))
            key = frozenset(verts)
            k = sum(mask)
            if key in index[k]:
                continue
            index[k][key] = len(cells[k])
            cells[k].append((max(vals[v] for v in verts), key, base, mask))
    bd = {}
    for k in range(1, d + 1):
        B = np.zeros((len(cells[k - 1]), len(cells[k])), dtype=np.uint8)
        for j, (_, _, base, mask) in enumerate(cells[k]):
            for ax in range(d):
                if not mask[ax]:
                    continue
                for shift in (0, 1):
                    fb = list(base)
                    fb[ax] += shift
                    fm = list(mask)
                    fm[ax] = 0
                    verts = []
                    for corner in product(*[(0, 1) if b else (0,) for b in fm]):
                        v = [fb[a] + corner[a] for a in range(d)]
                        v[0] %= shape[0]
                        verts.append(tuple(v))
                    B[index[k - 1][frozenset(verts)], j] ^= 1
        bd[k] = B
    return cells, bd


def essential_births(vals, a, degree):
    """Levels at which the rank of ``H_deg(K_c, K_a) -> H_deg(K, K_a)`` grows.

    Dense GF(2) linear algebra over all cells; intended for grids with a
    few hundred cells.  A level appears once per unit of rank gained.
    """
    vals = np.asarray(vals, dtype=float)
    cells, bd = cubical_cells(vals)
    if degree not in cells:
        return []
    rel_k = [i for i, c in enumerate(cells[degree]) if c[0] >= a]
    rel_km1 = [i for i, c in enumerate(cells.get(degree - 1, [])) if c[0] >= a]
    rel_kp1 = [i for i, c in enumerate(cells.get(degree + 1, [])) if c[0] >= a]
    if degree + 1 in bd and rel_kp1:
        B_full = bd[degree + 1][np.ix_(rel_k, rel_kp1)]
    else:
        B_full = np.zeros((len(rel_k), 0), np.uint8)
    base_rank = gf2_rank(B_full)
    births, current = [], 0
    for level in sorted({cells[degree][i][0] for i in rel_k}):
        sub = [j for j, i in enumerate(rel_k) if cells[degree][i][0] <= level]
        if degree in bd and rel_km1:
            Z = gf2_nullspace(bd[degree][np.ix_(rel_km1, [rel_k[j] for j in sub])])
        else:
            Z = np.eye(len(sub), dtype=np.uint8)
        Zfull = np.zeros((len(rel_k), Z.shape[1]), np.uint8)
        Zfull[sub] = Z
        rank = gf2_rank(np.hstack([B_full, Zfull])) - base_rank
        births += [float(level)] * (rank - current)
        current = rank
    return births


def essential_birth(vals, a, degree):
    """First essential birth in ``degree`` (``inf`` if there is none)."""
    b = essential_births(vals, a, degree)
    return b[0] if b else np.inf


def circle_spectral(f_vals):
    """Point and fundamental levels of the sublevel filtration of samples on a circle."""
    return essential_birth(np.asarray(f_vals)[:, None], -np.inf, 0), \
        essential_birth(np.asarray(f_vals)[:, None], -np.inf, 1)


# -- fishtail critical points ----------------------------------------------------------------

def fishtail_roots(q, b=1.0, d=0.3):
    """Real roots of ``-e^3 + b cos(q) e + d sin(q)`` for each ``q``."""
    out = []
    for qq in np.atleast_1d(q):
        r = np.roots([-1.0, 0.0, b * np.cos(qq), d * np.sin(qq)])
        out.append(np.sort(r[np.abs(r.imag) < 1e-9].real))
    return out


# -- trigonometric polynomials -----------------------------------------------------------------

def random_trig(rng, degree=5):
    """Random ``(terms, f)`` with ``terms`` in the ``(coeff, circle factor)`` format."""
    deg = int(rng.integers(1, degree + 1))
    terms = [(float(rng.uniform(-1, 1)), ("one",))]
    for k in range(1, deg + 1):
        terms.append((float(rng.uniform(-1, 1)) / k, ("cos", k)))
        terms.append((float(rng.uniform(-1, 1)) / k, ("sin", k)))

    def f(q):
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        for c, circ in terms:
            if circ[0] == "one":
                out = out + c
            elif circ[0] == "cos":
                out = out + c * np.cos(circ[1] * q)
            else:
                out = out + c * np.sin(circ[1] * q)
        return out
    return terms, f


def dense_extrema(f, n=200001):
    q = np.linspace(0, TWO_PI, n)
    v = f(q)
    return float(v.min()), float(v.max())

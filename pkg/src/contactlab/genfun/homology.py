"""
Z/2 persistence of lower-star filtrations on cubical grids.

The complex is the product of a periodic axis (the circle) and ``m``
interval axes.  Cells are encoded by a direction mask (which axes the cell
spans) and a base vertex.  Cell values are the maximum over vertices
(lower-star); ties are broken by dimension so faces precede cofaces.

Relative homology with respect to a subcomplex ``{value < a}`` is computed
by dropping those cells.  Degree-0 and degree-1 pairings use union-find
with a ground node standing in for the dropped subcomplex; higher degrees
are paired by the standard column reduction, processed from the top
dimension down with clearing.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np


@dataclass
class CubicalComplex:
    """Cells of ``S^1 x [interval]^m`` with a vertex function.

    Attributes
    ----------
    shape : tuple
        Vertex counts ``(n_q, n_e, ...)``; axis 0 is periodic.
    dims, values : (n_cells,) arrays
    indptr, faces : CSR boundary (face ids of each cell)
    """

    shape: tuple
    dims: np.ndarray
    values: np.ndarray
    indptr: np.ndarray
    faces: np.ndarray
    masks: list = field(default_factory=list)
    offsets: list = field(default_factory=list)

    @property
    def n_cells(self):
        return len(self.dims)

    def boundary(self, cell):
        return self.faces[self.indptr[cell]:self.indptr[cell + 1]]


def _base_shape(shape, mask):
    # the periodic axis keeps n bases for either direction
    return tuple(n if (k == 0 or not bit) else n - 1
                 for k, (n, bit) in enumerate(zip(shape, mask)))


def cubical_complex(vertex_values):
    """Build the lower-star cubical complex of a vertex function.

    Parameters
    ----------
    vertex_values : array of shape (n_q, n_e, ...)
        Values on the vertex grid; axis 0 is periodic.
    """
    vals = np.asarray(vertex_values, dtype=float)
    shape = vals.shape
    naxes = len(shape)
    masks = sorted(product((0, 1), repeat=naxes), key=lambda mk: (sum(mk), mk[::-1]))
    offsets, total = {}, 0
    for mk in masks:
        offsets[mk] = total
        total += int(np.prod(_base_shape(shape, mk)))
    dims = np.empty(total, dtype=np.int8)
    values = np.empty(total)
    face_lists = []
    counts = np.zeros(total, dtype=np.int64)
    for mk in masks:
        bshape = _base_shape(shape, mk)
        base = np.indices(bshape).reshape(naxes, -1)
        start = offsets[mk]
        n = base.shape[1]
        dims[start:start + n] = sum(mk)
        corner_vals = None
        for corner in product(*[(0, 1) if bit else (0,) for bit in mk]):
            idx = base + np.array(corner)[:, None]
            idx[0] %= shape[0]
            v = vals[tuple(idx)]
            corner_vals = v if corner_vals is None else np.maximum(corner_vals, v)
        values[start:start + n] = corner_vals
        cols = []
        for axis in range(naxes):
            if not mk[axis]:
                continue
            fmask = tuple(0 if k == axis else b for k, b in enumerate(mk))
            fshape = _base_shape(shape, fmask)
            for shift in (0, 1):
                idx = base.copy()
                idx[axis] += shift
                idx[0] %= shape[0]
                cols.append(offsets[fmask] + np.ravel_multi_index(tuple(idx), fshape))
        counts[start:start + n] = len(cols)
        face_lists.append(np.stack(cols, axis=1).ravel() if cols else np.zeros(0, np.int64))
    indptr = np.concatenate([[0], np.cumsum(counts)])
    faces = np.concatenate(face_lists)
    return CubicalComplex(shape, dims, values, indptr, faces, masks,
                          [offsets[mk] for mk in masks])


@dataclass
class Persistence:
    """Pairs and essential classes of a (relative) filtration.

    ``pairs[k]`` holds ``(birth, death)`` values of finite bars in degree k;
    ``essential[k]`` holds birth values of infinite bars in degree k, and
    ``essential_cells[k]`` the creating cells.
    """

    pairs: dict
    essential: dict
    essential_cells: dict


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def persistence(cx, a=-np.inf, max_dim=None):
    """Z/2 persistence of ``cx`` relative to ``{value < a}``.

    Parameters
    ----------
    cx : CubicalComplex
    a : float
        Cells with value strictly below ``a`` form the relative subcomplex.
    max_dim : int, optional
        Highest dimension to include (default: all).
    """
    top = int(cx.dims.max()) if max_dim is None else max_dim
    keep = (cx.values >= a) & (cx.dims <= top)
    ids = np.nonzero(keep)[0]
    order = ids[np.lexsort((ids, cx.dims[ids], cx.values[ids]))]
    rank = np.full(cx.n_cells, -1, dtype=np.int64)
    rank[order] = np.arange(len(order))
    rvals = cx.values[order]
    rdims = cx.dims[order]
    pairs = {k: [] for k in range(top + 1)}
    essential = {k: [] for k in range(top + 1)}
    ess_cells = {k: [] for k in range(top + 1)}
    cleared = np.zeros(len(order), dtype=bool)

    for d in range(top, 1, -1):
        pivot_of = {}
        store = {}
        for r in np.nonzero(rdims == d)[0]:
            if cleared[r]:
                continue
            fr = rank[cx.boundary(order[r])]
            col = set(int(x) for x in fr[fr >= 0])
            while col:
                low = max(col)
                other = pivot_of.get(low)
                if other is None:
                    break
                col ^= store[other]
            if col:
                low = max(col)
                pivot_of[low] = r
                store[r] = col
                cleared[low] = True
                pairs[d - 1].append((rvals[low], rvals[r]))
            else:
                essential[d].append(rvals[r])
                ess_cells[d].append(int(order[r]))

    # degrees 0 and 1 by union-find; node n is the ground (dropped cells)
    n = len(order)
    parent = list(range(n + 1))
    ground = n
    birth_rank = list(range(n)) + [-1]
    for r in range(n):
        if rdims[r] != 1 or cleared[r]:
            continue
        ends = rank[cx.boundary(order[r])]
        roots = [_find(parent, int(x)) if x >= 0 else ground for x in ends]
        if len(roots) == 1:
            roots.append(ground)
        ra, rb = roots
        if ra == rb:
            essential[1].append(rvals[r])
            ess_cells[1].append(int(order[r]))
            continue
        if birth_rank[ra] > birth_rank[rb]:
            ra, rb = rb, ra
        # rb is younger and dies here
        pairs[0].append((rvals[birth_rank[rb]], rvals[r]))
        parent[rb] = ra
    for r in range(n):
        if rdims[r] == 0 and _find(parent, r) == r:
            essential[0].append(rvals[r])
            ess_cells[0].append(int(order[r]))
    for k in essential:
        idx = np.argsort(essential[k], kind="stable")
        essential[k] = [essential[k][i] for i in idx]
        ess_cells[k] = [ess_cells[k][i] for i in idx]
    return Persistence(pairs, essential, ess_cells)

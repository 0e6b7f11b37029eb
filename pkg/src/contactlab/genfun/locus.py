"""Fiber-critical loci of generating functions and their Legendrian images."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..exceptions import RegularityError
from ..manifolds import ContactModel
from .curves import LegendrianCurve

TWO_PI = 2.0 * np.pi
J1S1 = ContactModel("J1S1")


class RegularityWarning(UserWarning):
    """0 may fail to be a regular value of the fiber derivative."""


@dataclass
class CriticalLocus:
    """Samples of ``Sigma_S = {d_e S = 0}`` on a uniform q-grid.

    Attributes
    ----------
    q : (n,) array
    e : (n, m) array
    column : (n,) int array
        Index of the q-grid column of each sample; samples are sorted by
        column, then lexicographically in ``e``.
    flagged : (n,) bool array
        Samples near a degenerate (tangential) zero.
    n_q : int
    t : float
    """

    q: np.ndarray
    e: np.ndarray
    column: np.ndarray
    flagged: np.ndarray
    n_q: int
    t: float

    @property
    def regular(self):
        return not bool(np.any(self.flagged))

    def columns(self):
        bounds = np.searchsorted(self.column, np.arange(self.n_q + 1))
        return [slice(bounds[i], bounds[i + 1]) for i in range(self.n_q)]


def search_radius(S):
    """Fiber radius containing every critical point (``|e| <= R_supp`` or ``e = 0``)."""
    return 1.05 * max(S.support_radius, 1.0)


def _bisect(S, q, lo, hi, flo, t, iters=48):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = S.d_e(q, mid[:, None], t)[:, 0]
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _locus_m1(S, t, qs, n_e, tol):
    R = search_radius(S)
    es = np.linspace(-R, R, n_e)
    Q, E = np.meshgrid(qs, es, indexing="ij")
    F = S.d_e(Q.ravel(), E.reshape(-1, 1), t)[:, 0].reshape(Q.shape)
    rows, vals, flags = [], [], []
    exact = F == 0
    ii, jj = np.nonzero(exact)
    rows.append(ii)
    vals.append(es[jj])
    flags.append(np.zeros(len(ii), dtype=bool))
    change = F[:, :-1] * F[:, 1:] < 0
    ii, jj = np.nonzero(change)
    if len(ii):
        roots = _bisect(S, qs[ii], es[jj], es[jj + 1], F[ii, jj], t)
        rows.append(ii)
        vals.append(roots)
        flags.append(np.zeros(len(ii), dtype=bool))
    # tangential zeros: interior local extrema of F that approach 0 without crossing
    a, b, c = F[:, :-2], F[:, 1:-1], F[:, 2:]
    ext = (np.abs(b) <= np.abs(a)) & (np.abs(b) <= np.abs(c)) & (a * b > 0) & (b * c > 0)
    ii, jj = np.nonzero(ext)
    if len(ii):
        curv = a[ii, jj] - 2 * b[ii, jj] + c[ii, jj]
        with np.errstate(divide="ignore", invalid="ignore"):
            vertex = b[ii, jj] - (c[ii, jj] - a[ii, jj]) ** 2 / (8 * curv)
        vertex = np.where(curv == 0, b[ii, jj], vertex)
        scale = max(1.0, float(np.max(np.abs(F))))
        bad = (np.abs(vertex) < tol * scale) | (vertex * b[ii, jj] < 0)
        if np.any(bad):
            rows.append(ii[bad])
            vals.append(es[jj[bad] + 1])
            flags.append(np.ones(int(bad.sum()), dtype=bool))
    row = np.concatenate(rows)
    e = np.concatenate(vals)
    flag = np.concatenate(flags)
    order = np.lexsort((e, row))
    return row[order], e[order, None], flag[order]


def _newton_m2(S, q, e, t, iters=40):
    e = e.copy()
    for _ in range(iters):
        F = S.d_e(q, e, t)
        J = S.d_ee(q, e, t)
        det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        safe = np.abs(det) > 1e-14
        d0 = np.where(safe, (J[:, 1, 1] * F[:, 0] - J[:, 0, 1] * F[:, 1]) / np.where(safe, det, 1), 0)
        d1 = np.where(safe, (J[:, 0, 0] * F[:, 1] - J[:, 1, 0] * F[:, 0]) / np.where(safe, det, 1), 0)
        step = np.stack([d0, d1], axis=1)
        nrm = np.linalg.norm(F, axis=1)
        lam = np.ones(len(q))
        for _ in range(8):
            trial = e - lam[:, None] * step
            ok = np.linalg.norm(S.d_e(q, trial, t), axis=1) <= (1 - 1e-4 * lam) * nrm + 1e-15
            if np.all(ok):
                break
            lam = np.where(ok, lam, 0.5 * lam)
        e = e - lam[:, None] * step
        if np.max(np.linalg.norm(step, axis=1)) < 1e-14:
            break
    res = np.linalg.norm(S.d_e(q, e, t), axis=1)
    J = S.d_ee(q, e, t)
    return e, res, np.abs(np.linalg.det(J))


def _locus_m2(S, t, qs, n_e, tol):
    R = search_radius(S)
    es = np.linspace(-R, R, n_e)
    Q, E1, E2 = np.meshgrid(qs, es, es, indexing="ij")
    F = S.d_e(Q.ravel(), np.stack([E1.ravel(), E2.ravel()], axis=1), t).reshape(Q.shape + (2,))
    corners = np.stack([F[:, :-1, :-1], F[:, 1:, :-1], F[:, :-1, 1:], F[:, 1:, 1:]], axis=-1)
    hit = np.all((corners.min(axis=-1) <= 0) & (corners.max(axis=-1) >= 0), axis=-1)
    ii, j1, j2 = np.nonzero(hit)
    seeds = np.stack([0.5 * (es[j1] + es[j1 + 1]), 0.5 * (es[j2] + es[j2 + 1])], axis=1)
    roots, res, det = _newton_m2(S, qs[ii], seeds, t)
    h = es[1] - es[0]
    keep = (res < 1e-10) & np.all(np.abs(roots - seeds) <= 2 * h, axis=1)
    ii, roots, det = ii[keep], roots[keep], det[keep]
    merge = max(1e-8, 1e-4 * h)
    out_i, out_e, out_f = [], [], []
    for i in np.unique(ii):
        sel = roots[ii == i]
        dets = det[ii == i]
        order = np.lexsort((sel[:, 1], sel[:, 0]))
        sel, dets = sel[order], dets[order]
        # Newton stalls around degenerate roots, so merge at a fraction of a cell
        kept = []
        for k in range(len(sel)):
            if all(np.max(np.abs(sel[k] - sel[j])) > merge for j in kept):
                kept.append(k)
        out_i += [i] * len(kept)
        out_e.append(sel[kept])
        out_f.append(dets[kept] < tol)
    if not out_e:
        return np.zeros(0, int), np.zeros((0, 2)), np.zeros(0, bool)
    return np.array(out_i), np.concatenate(out_e), np.concatenate(out_f)


def critical_locus(S, t=1.0, n_q=512, n_e=None, tol=1e-8):
    """Sample the fiber-critical locus of ``S_t``.

    For ``m = 1`` each q-column is scanned for sign changes of ``d_e S``,
    refined by bisection far below 1e-10; extrema of ``d_e S`` that approach
    zero without crossing are flagged.  For ``m = 2`` damped Newton is run
    from every grid cell whose corners bracket both components, and roots
    are merged below ``1e-4`` of a grid cell.  For ``m = 0`` the locus is the circle itself.

    Examples
    --------
    >>> from contactlab.genfun import GenFun
    >>> loc = critical_locus(GenFun([1.0]), n_q=8)
    >>> float(abs(loc.e).max())
    0.0
    """
    qs = TWO_PI * np.arange(n_q) / n_q
    if S.m == 0:
        return CriticalLocus(qs, np.zeros((n_q, 0)), np.arange(n_q), np.zeros(n_q, bool), n_q, t)
    if S.m == 1:
        rows, e, flag = _locus_m1(S, t, qs, 801 if n_e is None else n_e, tol)
    else:
        rows, e, flag = _locus_m2(S, t, qs, 61 if n_e is None else n_e, tol)
    if np.any(flag):
        warnings.warn(f"{int(flag.sum())} critical samples near a degenerate zero of d_e S",
                      RegularityWarning, stacklevel=2)
    return CriticalLocus(qs[rows], e, rows, flag, n_q, t)


def _match_columns(a, b, m):
    """Pair the samples of two adjacent columns.

    Returns (pairs, fold_a, fold_b): index pairs (i, j) with a[i] ~ b[j] and
    lists of index pairs inside a single column that meet at a fold.
    """
    ka, kb = len(a), len(b)
    if ka == kb:
        if m == 1:
            return [(i, i) for i in range(ka)], [], []
        cost = np.linalg.norm(a[:, None] - b[None], axis=2)
        r, c = linear_sum_assignment(cost)
        return list(zip(r, c)), [], []
    if abs(ka - kb) != 2:
        raise RegularityError(
            f"{abs(ka - kb)} critical points appear between adjacent columns; increase n_q")
    swap = ka > kb
    small, big = (b, a) if swap else (a, b)
    if m == 1:
        best = None
        for j in range(len(big) - 1):
            rest = np.delete(np.arange(len(big)), [j, j + 1])
            cost = float(np.abs(big[rest, 0] - small[:, 0]).sum())
            if best is None or cost < best[0]:
                best = (cost, j, rest)
        _, j, rest = best
        pairs = list(zip(range(len(small)), rest))
        fold = [(j, j + 1)]
    else:
        cost = np.linalg.norm(small[:, None] - big[None], axis=2)
        r, c = linear_sum_assignment(cost)
        pairs = list(zip(r, c))
        left = sorted(set(range(len(big))) - set(c))
        fold = [tuple(left)]
    if swap:
        return [(j, i) for i, j in pairs], fold, []
    return pairs, [], fold


def _project(S, t, q, e, iters=30):
    """Minimum-norm Newton projection of (q, e) onto ``d_e S = 0``."""
    q, e = q.copy(), e.copy()
    for _ in range(iters):
        F = S.d_e(q, e, t)
        J = np.concatenate([S.d_qe(q, e, t)[:, :, None], S.d_ee(q, e, t)], axis=2)
        step = np.einsum("nij,nj->ni", np.linalg.pinv(J), F)
        q, e = q - step[:, 0], e - step[:, 1:]
        if np.max(np.abs(step)) < 1e-14:
            break
    return q, e


def _refine(S, t, nodes, max_step, max_depth=8):
    """Insert projected midpoints until consecutive nodes are ``max_step`` apart.

    ``nodes`` is a closed polyline in (lifted q, e); the closing segment is
    handled by appending the first node shifted by the winding in q.
    """
    close = nodes[-1, 0] + _fold(nodes[0, 0] - nodes[-1, 0])
    first = nodes[0].copy()
    first[0] = close
    path = np.vstack([nodes, first])
    for _ in range(max_depth):
        gap = np.linalg.norm(np.diff(path, axis=0), axis=1)
        long = np.nonzero(gap > max_step)[0]
        if len(long) == 0:
            break
        mids = 0.5 * (path[long] + path[long + 1])
        mq, me = _project(S, t, mids[:, 0], mids[:, 1:])
        path = np.insert(path, long + 1, np.column_stack([mq, me]), axis=0)
    return path[:-1]


def _fold(d):
    return d - TWO_PI * np.round(d / TWO_PI)


def _trace_components(locus, m):
    cols = locus.columns()
    n = len(locus.q)
    rows, cols_idx = [], []
    for i in range(locus.n_q):
        a, b = cols[i], cols[(i + 1) % locus.n_q]
        pairs, fold_a, fold_b = _match_columns(locus.e[a], locus.e[b], m)
        for u, v in pairs:
            rows.append(a.start + u)
            cols_idx.append(b.start + v)
        for u, v in fold_a:
            rows.append(a.start + u)
            cols_idx.append(a.start + v)
        for u, v in fold_b:
            rows.append(b.start + u)
            cols_idx.append(b.start + v)
    rows, cols_idx = np.array(rows, int), np.array(cols_idx, int)
    adj = [[] for _ in range(n)]
    for u, v in zip(rows, cols_idx):
        adj[u].append(v)
        adj[v].append(u)
    if any(len(x) != 2 for x in adj):
        raise RegularityError("critical locus is not a union of closed curves at this resolution")
    graph = coo_matrix((np.ones(len(rows)), (rows, cols_idx)), shape=(n, n))
    n_comp, labels = connected_components(graph, directed=False)
    comps = []
    for c in range(n_comp):
        start = int(np.nonzero(labels == c)[0][0])
        order, prev, cur = [start], -1, start
        while True:
            a, b = adj[cur]
            nxt = b if a == prev else a
            if nxt == start:
                break
            order.append(nxt)
            prev, cur = cur, nxt
        comps.append(order)
    return comps


def _lift_q(q):
    d = _fold(np.diff(q))
    return np.concatenate([[q[0]], q[0] + np.cumsum(d)])


def legendrian_from_genfun(S, t=1.0, n_q=512, n_e=None, max_step=None):
    """Legendrian curve ``i_S(Sigma_S) = {(q, d_q S, S)}`` in ``J^1 S^1``.

    Components are found by continuation in ``q``: equal-size adjacent
    columns are matched in order (``m = 1``) or by assignment (``m = 2``);
    a pair appearing or disappearing between two columns is joined at a
    fold.  Long steps (near folds) are filled with projected midpoints.

    Raises
    ------
    RegularityError
        If the critical locus has flagged samples or cannot be traced.

    Examples
    --------
    >>> from contactlab.genfun import GenFun
    >>> L = legendrian_from_genfun(GenFun([1.0]), n_q=64)
    >>> float(abs(L.points[:, 1:]).max())
    0.0
    """
    locus = critical_locus(S, t, n_q, n_e)
    if not locus.regular:
        raise RegularityError("critical locus has degenerate samples; 0 is not a regular value")
    if S.m == 0:
        pts = np.column_stack([locus.q, S.d_q(locus.q, locus.e, t), S.value(locus.q, locus.e, t)])
        return LegendrianCurve(J1S1, pts)
    comps = _trace_components(locus, S.m)
    step = 0.5 * TWO_PI / n_q if max_step is None else max_step
    pts, labels = [], []
    for c, order in enumerate(comps):
        nodes = np.column_stack([_lift_q(locus.q[order]), locus.e[order]])
        nodes = _refine(S, t, nodes, step)
        q, e = np.mod(nodes[:, 0], TWO_PI), nodes[:, 1:]
        pts.append(np.column_stack([q, S.d_q(q, e, t), S.value(q, e, t)]))
        labels.append(np.full(len(q), c))
    return LegendrianCurve(J1S1, np.concatenate(pts), np.concatenate(labels))


def locus_with_fibers(S, t=1.0, n_q=512, n_e=None):
    """Ordered ``(q, e)`` samples per component, as used by the Legendrian image.

    Unlike :func:`legendrian_from_genfun` this tolerates degenerate
    samples.  For ``m = 1`` a flagged sample is a near-miss of ``d_e S``
    without a sign change (a fold pair about to be born) and is dropped;
    for ``m = 2`` flagged samples are genuine roots with a singular
    Hessian and are kept.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegularityWarning)
        locus = critical_locus(S, t, n_q, n_e)
    if S.m == 1 and not locus.regular:
        ok = ~locus.flagged
        locus = CriticalLocus(locus.q[ok], locus.e[ok], locus.column[ok],
                              locus.flagged[ok], locus.n_q, locus.t)
    if S.m == 0:
        return [np.column_stack([locus.q])]
    out = []
    for order in _trace_components(locus, S.m):
        nodes = np.column_stack([_lift_q(locus.q[order]), locus.e[order]])
        nodes = _refine(S, t, nodes, 0.5 * TWO_PI / n_q)
        nodes[:, 0] = np.mod(nodes[:, 0], TWO_PI)
        out.append(nodes)
    return out

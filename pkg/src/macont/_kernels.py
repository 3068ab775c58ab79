"""Hot loops, compiled with numba when available.

Every kernel has a pure-numpy twin. Setting ``MACONT_DISABLE_NUMBA=1`` in the
environment (before import) routes all calls to the numpy versions; the
``benchmarks/bench_kernels.py`` script times both.
"""

from __future__ import annotations

import os

import numpy as np

NUMBA_DISABLED = os.environ.get("MACONT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED

# local edge order of a tetrahedron: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
# vertex-disjoint local edge pairs, i.e. the three ways to split 4 vertices in two
TET_DISJOINT_PAIRS = np.array([[0, 5], [1, 4], [2, 3]], dtype=np.int64)

_CHUNK = 1 << 22


def polyline_distance_numpy(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    points = np.ascontiguousarray(points, dtype=np.float64)
    out = np.full(points.shape[0], np.inf)
    if seg_a.shape[0] == 0:
        return out
    ab = seg_b - seg_a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    safe = np.where(ab2 > 0.0, ab2, 1.0)
    step = max(1, _CHUNK // seg_a.shape[0])
    for s in range(0, points.shape[0], step):
        p = points[s:s + step]
        diff = p[:, None, :] - seg_a[None, :, :]
        t = np.einsum("qsd,sd->qs", diff, ab) / safe
        t = np.where(ab2 > 0.0, np.clip(t, 0.0, 1.0), 0.0)
        r = diff - t[..., None] * ab[None, :, :]
        out[s:s + step] = np.sqrt(np.min(np.einsum("qsd,qsd->qs", r, r), axis=1))
    return out


def slice_assembly_numpy(local_nid: np.ndarray, dim: int) -> np.ndarray:
    """Marching-simplices connectivity.

    ``local_nid[s, e]`` is the level-set vertex id on local edge ``e`` of
    simplex ``s``, or -1 when that edge does not cross the level. Returns the
    (dim-1)-simplices of the level set as sorted rows, ordered by parent
    simplex; a crossed tetrahedron with four crossing edges yields two
    triangles split along the diagonal holding the smallest id.
    """
    local_nid = np.asarray(local_nid, dtype=np.int64)
    crossed = local_nid >= 0
    count = crossed.sum(axis=1)
    if dim == 1:
        rows = np.flatnonzero(count == 1)
        return local_nid[rows, :1].copy()
    if dim == 2:
        rows = np.flatnonzero(count == 2)
        return np.sort(local_nid[rows], axis=1)[:, 1:]
    if dim != 3:
        raise ValueError(f"unsupported simplex dimension {dim}")
    tri_rows = np.flatnonzero(count == 3)
    tris = np.sort(local_nid[tri_rows], axis=1)[:, 3:]
    quad_rows = np.flatnonzero(count == 4)
    q = local_nid[quad_rows]
    # the non-crossing edges form one disjoint pair; the other two pairs are the diagonals
    pair_missing = np.zeros(len(quad_rows), dtype=np.int64)
    for p in range(3):
        a, b = TET_DISJOINT_PAIRS[p]
        pair_missing[(q[:, a] < 0) & (q[:, b] < 0)] = p
    d1 = (pair_missing + 1) % 3
    d2 = (pair_missing + 2) % 3
    d1_ids = np.stack([q[np.arange(len(q)), TET_DISJOINT_PAIRS[d1, 0]],
                       q[np.arange(len(q)), TET_DISJOINT_PAIRS[d1, 1]]], axis=1)
    d2_ids = np.stack([q[np.arange(len(q)), TET_DISJOINT_PAIRS[d2, 0]],
                       q[np.arange(len(q)), TET_DISJOINT_PAIRS[d2, 1]]], axis=1)
    use_d1 = d1_ids.min(axis=1) < d2_ids.min(axis=1)
    diag = np.where(use_d1[:, None], d1_ids, d2_ids)
    other = np.where(use_d1[:, None], d2_ids, d1_ids)
    t1 = np.sort(np.column_stack([diag, other[:, 0]]), axis=1)
    t2 = np.sort(np.column_stack([diag, other[:, 1]]), axis=1)
    parents = np.concatenate([tri_rows, quad_rows, quad_rows])
    sub = np.concatenate([np.zeros(len(tri_rows), dtype=np.int64),
                          np.zeros(len(quad_rows), dtype=np.int64),
                          np.ones(len(quad_rows), dtype=np.int64)])
    order = np.lexsort((sub, parents))
    out = np.concatenate([tris, t1, t2], axis=0)
    return out[order].reshape(-1, 3)


if HAVE_NUMBA:

    @njit(cache=True)
    def polyline_distance_numba(points, seg_a, seg_b):  # pragma: no cover - compiled
        nq, d = points.shape
        ns = seg_a.shape[0]
        out = np.empty(nq)
        for q in range(nq):
            best = np.inf
            for s in range(ns):
                ab2 = 0.0
                dot = 0.0
                for k in range(d):
                    e = seg_b[s, k] - seg_a[s, k]
                    ab2 += e * e
                    dot += (points[q, k] - seg_a[s, k]) * e
                t = 0.0
                if ab2 > 0.0:
                    t = dot / ab2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                r2 = 0.0
                for k in range(d):
                    r = points[q, k] - seg_a[s, k] - t * (seg_b[s, k] - seg_a[s, k])
                    r2 += r * r
                if r2 < best:
                    best = r2
            out[q] = np.sqrt(best)
        return out

    @njit(cache=True)
    def _sort_small(row):  # pragma: no cover - compiled
        for a in range(1, row.shape[0]):
            v = row[a]
            b = a - 1
            while b >= 0 and row[b] > v:
                row[b + 1] = row[b]
                b -= 1
            row[b + 1] = v
        return row

    @njit(cache=True)
    def slice_assembly_numba(local_nid, dim, disjoint):  # pragma: no cover - compiled
        ns, ne = local_nid.shape
        out = np.empty((2 * ns, dim), dtype=np.int64)
        k = 0
        for s in range(ns):
            count = 0
            for e in range(ne):
                if local_nid[s, e] >= 0:
                    count += 1
            if count == 0:
                continue
            if dim <= 2 or count == 3:
                c = 0
                for e in range(ne):
                    if local_nid[s, e] >= 0:
                        out[k, c] = local_nid[s, e]
                        c += 1
                _sort_small(out[k])
                k += 1
                continue
            missing = 0
            for p in range(3):
                if local_nid[s, disjoint[p, 0]] < 0 and local_nid[s, disjoint[p, 1]] < 0:
                    missing = p
            p1 = (missing + 1) % 3
            p2 = (missing + 2) % 3
            a1 = local_nid[s, disjoint[p1, 0]]
            b1 = local_nid[s, disjoint[p1, 1]]
            a2 = local_nid[s, disjoint[p2, 0]]
            b2 = local_nid[s, disjoint[p2, 1]]
            if min(a1, b1) < min(a2, b2):
                u, w, o1, o2 = a1, b1, a2, b2
            else:
                u, w, o1, o2 = a2, b2, a1, b1
            out[k, 0] = u
            out[k, 1] = w
            out[k, 2] = o1
            _sort_small(out[k])
            out[k + 1, 0] = u
            out[k + 1, 1] = w
            out[k + 1, 2] = o2
            _sort_small(out[k + 1])
            k += 2
        return out[:k].copy()


def polyline_distance(points, seg_a, seg_b) -> np.ndarray:
    """Distance from each point to the union of closed segments ``[seg_a[s], seg_b[s]]``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    seg_a = np.ascontiguousarray(seg_a, dtype=np.float64)
    seg_b = np.ascontiguousarray(seg_b, dtype=np.float64)
    if points.ndim != 2 or seg_a.shape != seg_b.shape or (seg_a.size and seg_a.shape[1] != points.shape[1]):
        raise ValueError("dimension mismatch between points and segments")
    if seg_a.shape[0] == 0:
        return np.full(points.shape[0], np.inf)
    if USE_NUMBA:
        return polyline_distance_numba(points, seg_a, seg_b)
    return polyline_distance_numpy(points, seg_a, seg_b)


def slice_assembly(local_nid, dim: int) -> np.ndarray:
    local_nid = np.ascontiguousarray(local_nid, dtype=np.int64)
    if USE_NUMBA:
        if dim not in (1, 2, 3):
            raise ValueError(f"unsupported simplex dimension {dim}")
        return slice_assembly_numba(local_nid, dim, TET_DISJOINT_PAIRS)
    return slice_assembly_numpy(local_nid, dim)

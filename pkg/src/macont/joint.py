"""Slicing an approximation sequence along the diagonal y_i = x_j.

For each k the composite h(x, y) = theta(y_i) - x_j is sampled at the mesh
vertices of M_k, a level eps_k that no vertex value hits is chosen close to
0, and the piecewise-linear level set N_k = {h = eps_k} is extracted by
marching simplices. Dropping x_j from the interpolated values gives the maps
for G(x_{!=j}) = {y in F(x) : y_i = x_j}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from . import _kernels
from .bump import TransitionFunction, theta
from .geometry import Box, Disk, HypothesisError, Interval
from .mesh import (ApproximationSequence, PLMap, SimplicialManifold, boundary,
                   boundary_chord_sag)
from .oracles import DiagonalSliceOracle, PointSetOracle, SetValuedOracle


class SelectionError(RuntimeError):
    """No admissible regular value was found."""


class RegularityError(ValueError):
    """The requested level is hit by a vertex value."""


# dyadic shifts tried around the scheduled level, margin * 2^p for p = 1..
_MAX_SHIFT_EXPONENT = 64


@dataclass(frozen=True)
class SliceConfig:
    i: int
    j: int
    tf: TransitionFunction
    margin: float | None = None  # defaults to 1e-9 * alpha

    @classmethod
    def build(cls, i: int, j: int, box: Box, tix: Interval, margin: float | None = None) -> "SliceConfig":
        return cls(i, j, TransitionFunction(box[j], tix), margin)

    @property
    def delta_margin(self) -> float:
        return self.margin if self.margin is not None else 1e-9 * self.tf.alpha


@dataclass(frozen=True, eq=False)
class SliceResult:
    N: SimplicialManifold
    lifted: PLMap          # N-vertex values in R^(n+m)
    gprime: PLMap          # after dropping x_j (equal to ``lifted`` until projected)
    epsilon_used: float
    parent_edges: np.ndarray   # (V_N, 2) vertex ids of the M edge each N-vertex lies on
    params: np.ndarray         # interpolation parameter t along the parent edge
    h_values: np.ndarray       # h at the vertices of M, indexed by vertex id
    boundary_vertices: np.ndarray  # N-vertices lying on boundary edges of M
    M: SimplicialManifold | None = None  # the sliced manifold
    boundary_tolerance: float = 0.0
    disk: Disk | None = None


def h_eval(tf: TransitionFunction, i: int, j: int, point, n: int):
    """theta(y_i) - x_j for points (x, y) in R^(n+m); rows of a 2-d array or a single point."""
    P = np.asarray(point, dtype=float)
    if P.shape[-1] < n + i or j > n:
        raise ValueError("point dimension does not match the slice indices")
    return theta(tf, P[..., n + i - 1]) - P[..., j - 1]


def select_regular_value(h_vertex_values, alpha: float, k: int, delta_margin: float) -> float:
    """Scheduled level alpha * 2^-(k+1), shifted by the smallest dyadic step that clears every vertex value."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    vals = np.sort(np.asarray(h_vertex_values, dtype=float).ravel())
    cand = alpha * 2.0 ** (-(k + 1))

    def clearance(e):
        if vals.size == 0:
            return math.inf
        pos = np.searchsorted(vals, e)
        near = vals[max(0, pos - 1):pos + 1]
        return float(np.min(np.abs(near - e)))

    if clearance(cand) >= delta_margin:
        return cand
    for p in range(1, _MAX_SHIFT_EXPONENT):
        shift = delta_margin * 2.0 ** p
        for e in (cand + shift, cand - shift):
            if abs(e) < alpha and clearance(e) >= delta_margin:
                return e
        if shift > 2 * alpha:
            break
    raise SelectionError(f"no level within alpha={alpha} clears the vertex values by {delta_margin}")


def _local_edge_pairs(dim: int) -> list[tuple[int, int]]:
    return list(combinations(range(dim + 1), 2))


def extract_level_set(M: SimplicialManifold, g: PLMap, h_values, eps: float) -> SliceResult:
    """Piecewise-linear level set {h = eps} of a vertex function on M, with interpolated values of g.

    ``h_values`` is indexed by vertex id (same indexing as ``g.values``).
    """
    h = np.asarray(h_values, dtype=float)
    used = h[M.vertices]
    if np.any(used == eps):
        raise RegularityError(f"level {eps!r} is attained at a vertex")
    above = h > eps
    dim = M.dim
    if dim == 0:
        raise ValueError("cannot slice a 0-dimensional complex")
    pairs = _local_edge_pairs(dim)
    S = M.simplices
    local_a = np.stack([S[:, a] for a, _ in pairs], axis=1)
    local_b = np.stack([S[:, b] for _, b in pairs], axis=1)
    cross_local = above[local_a] != above[local_b]
    ea = local_a[cross_local]
    eb = local_b[cross_local]
    if ea.size:
        edges, inverse = np.unique(np.column_stack([ea, eb]), axis=0, return_inverse=True)
        inverse = inverse.ravel()
    else:
        edges, inverse = np.empty((0, 2), dtype=np.int64), np.empty(0, dtype=np.int64)
    local_nid = np.full(local_a.shape, -1, dtype=np.int64)
    local_nid[cross_local] = inverse
    simplices = _kernels.slice_assembly(local_nid, dim)

    ha, hb = h[edges[:, 0]], h[edges[:, 1]]
    t = (eps - ha) / (hb - ha)
    va, vb = g.values[edges[:, 0]], g.values[edges[:, 1]]
    lifted_vals = (1.0 - t)[:, None] * va + t[:, None] * vb

    N = SimplicialManifold(dim - 1, simplices, vertices=np.arange(edges.shape[0]))
    lifted = PLMap(N, lifted_vals if edges.shape[0] else np.empty((0, g.target_dim)))

    if dim >= 2:
        bedges = boundary(M).edges() if dim == 3 else M.boundary_facets
        on_bd = _rows_in(edges, bedges)
    else:
        on_bd = np.zeros(edges.shape[0], dtype=bool)
    return SliceResult(N, lifted, lifted, float(eps), edges, t, h, np.flatnonzero(on_bd), M)


def _rows_in(rows: np.ndarray, table: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0 or table.shape[0] == 0:
        return np.zeros(rows.shape[0], dtype=bool)
    key = lambda a: a[:, 0].astype(np.int64) * (int(max(rows.max(), table.max())) + 1) + a[:, 1]
    return np.isin(key(rows), key(table))


def project_drop_j(g: PLMap, j: int) -> PLMap:
    """Delete coordinate j (1-based, an input coordinate) from every vertex value."""
    if not 1 <= j <= g.target_dim:
        raise IndexError(f"coordinate {j} out of range")
    return PLMap(g.manifold, np.delete(g.values, j - 1, axis=1))


class JointSlicer:
    """Callable k -> (N_k, g'_k); ``slice(k)`` exposes the full :class:`SliceResult`."""

    def __init__(self, seq: ApproximationSequence, cfg: SliceConfig):
        self.seq = seq
        self.cfg = cfg

    def slice(self, k: int) -> SliceResult:
        seq, cfg = self.seq, self.cfg
        M, g = seq.item(k)
        h = np.zeros(g.values.shape[0])
        h[M.vertices] = h_eval(cfg.tf, cfg.i, cfg.j, g.values[M.vertices], seq.n)
        eps = select_regular_value(h[M.vertices], cfg.tf.alpha, k, cfg.delta_margin)
        res = extract_level_set(M, g, h, eps)
        res = replace(res, gprime=project_drop_j(res.lifted, cfg.j))
        if seq.n >= 2 and seq.disk is not None:
            level = theta(cfg.tf, 0.0) - eps
            disk_k = seq.disk.slice(cfg.j, level)
            sag = boundary_chord_sag(M, g.values, seq.disk)
            # a point sagging by s off the sphere sits at distance >= sqrt((R-s)^2 - d^2) inside the slice disk
            R = seq.disk.radius
            off = level - seq.disk.center[cfg.j - 1]
            inner = math.sqrt(max(0.0, (R - sag) ** 2 - off ** 2))
            res = replace(res, disk=disk_k, boundary_tolerance=disk_k.radius - inner + 1e-12)
        return res

    def __call__(self, k: int):
        res = self.slice(k)
        return res.N, res.gprime


def joint(seq: ApproximationSequence, cfg: SliceConfig,
          oracle_F: SetValuedOracle) -> tuple[ApproximationSequence, SetValuedOracle]:
    """Sequence and oracle for G(x_{!=j}) = {y in F(x) : y_i = x_j}.

    Requires tix strictly inside ix_j (checked by the transition function) and
    F_i within tix over the box.
    """
    from .verify import check_hypothesis_eq1

    if seq.n < 1:
        raise ValueError("JOINT needs at least one input coordinate")
    if not 1 <= cfg.i <= seq.m or not 1 <= cfg.j <= seq.n:
        raise IndexError(f"slice indices i={cfg.i}, j={cfg.j} out of range for n={seq.n}, m={seq.m}")
    box = seq.box if seq.box is not None else oracle_F.box
    if cfg.tf.outer != box[cfg.j]:
        raise ValueError("transition function must be built on the box interval ix_j")
    if not check_hypothesis_eq1(oracle_F, cfg.i, cfg.tf.inner, box):
        raise HypothesisError(f"F_{cfg.i} is not contained in {cfg.tf.inner} over the box")
    slicer = JointSlicer(seq, cfg)
    if seq.n >= 2 and seq.disk is not None:
        limit_disk = seq.disk.slice(cfg.j, theta(cfg.tf, 0.0))
    else:
        limit_disk = None
    out_seq = ApproximationSequence(seq.n - 1, seq.m, limit_disk, slicer, seq.declared_bound,
                                    box.remove_coord(cfg.j), f"joint({seq.label}; i={cfg.i}, j={cfg.j})")
    oracle_G = DiagonalSliceOracle(oracle_F, cfg.i, cfg.j)
    if oracle_G.n == 0:
        oracle_G = PointSetOracle(oracle_G.fibre(()))
    return out_seq, oracle_G

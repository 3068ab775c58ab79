"""Simplicial manifolds with boundary, piecewise-linear maps and approximation sequences."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .geometry import Box, Disk

SUPPORTED_DIMS = (1, 2, 3)


class DimensionError(ValueError):
    pass


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _faces(simplices: np.ndarray, k: int) -> np.ndarray:
    """All k-faces (k+1 vertices) of the given simplices, with repetition, rows sorted."""
    width = simplices.shape[1]
    combos = list(itertools.combinations(range(width), k + 1))
    if not combos or simplices.shape[0] == 0:
        return np.empty((0, k + 1), dtype=np.int64)
    return np.concatenate([simplices[:, list(c)] for c in combos], axis=0)


@dataclass(frozen=True, eq=False)
class SimplicialManifold:
    """A finite pure simplicial complex of dimension ``dim``.

    ``simplices`` holds one sorted row of ``dim + 1`` vertex ids per top
    simplex. Vertex ids index into the value array of any :class:`PLMap`
    carried by the complex, so a sub-complex (such as the boundary) keeps the
    ids of its parent.
    """

    dim: int
    simplices: np.ndarray
    vertices: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.dim < 0:
            raise DimensionError("dimension must be nonnegative")
        s = np.asarray(self.simplices, dtype=np.int64).reshape(-1, self.dim + 1)
        s = np.sort(s, axis=1)
        if s.shape[0] and np.any(s[:, 1:] == s[:, :-1]):
            raise ValueError("simplex with repeated vertex")
        object.__setattr__(self, "simplices", _readonly(s))
        if self.vertices is None:
            verts = np.unique(s)
        else:
            verts = np.unique(np.asarray(self.vertices, dtype=np.int64))
        object.__setattr__(self, "vertices", _readonly(verts))

    @classmethod
    def empty(cls, dim: int) -> "SimplicialManifold":
        return cls(dim, np.empty((0, dim + 1), dtype=np.int64))

    @property
    def n_simplices(self) -> int:
        return self.simplices.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def faces(self, k: int) -> np.ndarray:
        """Distinct k-faces as sorted rows."""
        if k > self.dim:
            return np.empty((0, k + 1), dtype=np.int64)
        if k == 0:
            return self.vertices.reshape(-1, 1)
        f = _faces(self.simplices, k)
        return np.unique(f, axis=0) if f.shape[0] else f

    @cached_property
    def _facet_incidence(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dim == 0:
            return np.empty((0, 0), dtype=np.int64), np.empty(0, dtype=np.int64)
        f = _faces(self.simplices, self.dim - 1)
        if f.shape[0] == 0:
            return f, np.empty(0, dtype=np.int64)
        faces, counts = np.unique(f, axis=0, return_counts=True)
        return faces, counts

    @property
    def boundary_facets(self) -> np.ndarray:
        faces, counts = self._facet_incidence
        return faces[counts == 1]

    def is_pseudomanifold(self) -> bool:
        _, counts = self._facet_incidence
        return bool(np.all((counts == 1) | (counts == 2)))

    def is_closed(self) -> bool:
        return self.boundary_facets.shape[0] == 0

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_facets)

    def edges(self) -> np.ndarray:
        return self.faces(1)

    def euler_characteristic(self) -> int:
        return int(sum((-1) ** k * self.faces(k).shape[0] for k in range(self.dim + 1)))

    def n_components(self) -> int:
        if self.n_vertices == 0:
            return 0
        if self.dim == 0:
            return self.n_vertices
        local = np.searchsorted(self.vertices, self.simplices)
        rows = np.repeat(local[:, 0], self.dim)
        cols = local[:, 1:].ravel()
        nv = self.n_vertices
        adj = coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(nv, nv))
        ncomp, _ = connected_components(adj, directed=False)
        return int(ncomp)


def boundary(M: SimplicialManifold) -> SimplicialManifold:
    """Boundary complex over the facets contained in exactly one simplex.

    The boundary of a 0-dimensional complex is the empty complex.
    """
    if M.dim == 0:
        return SimplicialManifold.empty(0)
    return SimplicialManifold(M.dim - 1, M.boundary_facets)


@dataclass(frozen=True)
class ManifoldPoint:
    simplex: int
    bary: tuple[float, ...]

    def __post_init__(self):
        b = np.asarray(self.bary, dtype=float)
        if b.ndim != 1 or np.any(b < 0) or abs(b.sum() - 1.0) > 1e-12:
            raise ValueError(f"invalid barycentric coordinates {self.bary}")
        object.__setattr__(self, "bary", tuple(float(v) for v in b))

    @classmethod
    def vertex(cls, M: SimplicialManifold, simplex: int, local: int) -> "ManifoldPoint":
        b = [0.0] * (M.dim + 1)
        b[local] = 1.0
        return cls(simplex, tuple(b))


@dataclass(frozen=True, eq=False)
class PLMap:
    """Vertex values on a simplicial manifold, extended barycentrically."""

    manifold: SimplicialManifold
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if self.manifold.n_vertices and int(self.manifold.vertices[-1]) >= v.shape[0]:
            raise ValueError("PLMap is missing values for some vertices of its carrier")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def target_dim(self) -> int:
        return self.values.shape[1]

    def restrict(self, sub: SimplicialManifold) -> "PLMap":
        return PLMap(sub, self.values)

    def vertex_values(self) -> np.ndarray:
        """Values at the carrier's vertices, in ``manifold.vertices`` order."""
        return self.values[self.manifold.vertices]

    def evaluate_many(self, simplices: np.ndarray, bary: np.ndarray) -> np.ndarray:
        verts = self.manifold.simplices[np.asarray(simplices)]
        return np.einsum("pk,pkd->pd", np.asarray(bary, dtype=float), self.values[verts])


def evaluate(g: PLMap, p: ManifoldPoint) -> np.ndarray:
    """Barycentric combination of the vertex values of ``p``'s simplex."""
    M = g.manifold
    if not 0 <= p.simplex < M.n_simplices:
        raise IndexError(f"unknown simplex id {p.simplex}")
    if len(p.bary) != M.dim + 1:
        raise ValueError(f"expected {M.dim + 1} barycentric coordinates, got {len(p.bary)}")
    verts = M.simplices[p.simplex]
    b = np.asarray(p.bary)
    out = b @ g.values[verts]
    # exact at vertices, whatever the rounding of 1.0 * v + 0.0 * w
    hit = np.flatnonzero(b == 1.0)
    if hit.size:
        return g.values[verts[hit[0]]].copy()
    return out


# ---------------------------------------------------------------------------
# disk meshes


def _segment_mesh(resolution: int):
    simplices = np.column_stack([np.arange(resolution), np.arange(1, resolution + 1)])
    points = np.linspace(-1.0, 1.0, resolution + 1)[:, None]
    return simplices, points


def _ring_start(ring: int) -> int:
    return 1 + 3 * ring * (ring - 1)


def _ring_mesh(resolution: int):
    """Center vertex plus ``resolution`` rings; ring l carries 6l vertices."""
    pts = [np.zeros((1, 2))]
    for ring in range(1, resolution + 1):
        ang = 2.0 * np.pi * np.arange(6 * ring) / (6 * ring)
        rad = 1.0 if ring == resolution else ring / resolution
        pts.append(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
    tris = []
    o = np.arange(6)
    tris.append(np.column_stack([_ring_start(1) + o, _ring_start(1) + (o + 1) % 6, np.zeros(6, dtype=np.int64)]))
    for ring in range(2, resolution + 1):
        inner, outer = ring - 1, ring
        s0_in, s0_out = _ring_start(inner), _ring_start(outer)
        sector = np.repeat(np.arange(6), outer)
        q = np.tile(np.arange(outer), 6)
        o_q = s0_out + (sector * outer + q) % (6 * outer)
        o_q1 = s0_out + (sector * outer + q + 1) % (6 * outer)
        i_q = s0_in + (sector * inner + q) % (6 * inner)
        tris.append(np.column_stack([o_q, o_q1, i_q]))
        sector = np.repeat(np.arange(6), inner)
        q = np.tile(np.arange(inner), 6)
        i_q = s0_in + (sector * inner + q) % (6 * inner)
        i_q1 = s0_in + (sector * inner + q + 1) % (6 * inner)
        o_q1 = s0_out + (sector * outer + q + 1) % (6 * outer)
        tris.append(np.column_stack([i_q, o_q1, i_q1]))
    return np.concatenate(tris, axis=0), np.concatenate(pts, axis=0)


_KUHN_PERMS = list(itertools.permutations(range(3)))


def _ball_mesh(resolution: int):
    """Kuhn-subdivided cube grid pushed radially onto the unit ball.

    Concentric cube shells become concentric spherical layers; the cube
    surface lands exactly on the unit sphere.
    """
    r = resolution
    side = r + 1
    axis = np.linspace(-1.0, 1.0, side)
    I, J, K = np.meshgrid(axis, axis, axis, indexing="ij")
    u = np.column_stack([I.ravel(), J.ravel(), K.ravel()])
    inf_norm = np.max(np.abs(u), axis=1)
    two_norm = np.linalg.norm(u, axis=1)
    scale = np.divide(inf_norm, two_norm, out=np.zeros_like(two_norm), where=two_norm > 0)
    pts = u * scale[:, None]
    on_shell = inf_norm == 1.0
    pts[on_shell] = u[on_shell] / two_norm[on_shell, None]

    def vid(i, j, k):
        return (i * side + j) * side + k

    ci, cj, ck = np.meshgrid(np.arange(r), np.arange(r), np.arange(r), indexing="ij")
    base = np.stack([ci.ravel(), cj.ravel(), ck.ravel()], axis=1)
    tets = []
    for perm in _KUHN_PERMS:
        corner = base.copy()
        cols = [vid(*corner.T)]
        for axis_id in perm:
            corner = corner.copy()
            corner[:, axis_id] += 1
            cols.append(vid(*corner.T))
        tets.append(np.column_stack(cols))
    return np.concatenate(tets, axis=0), pts


def build_disk_mesh(n: int, disk: Disk, resolution: int) -> tuple[SimplicialManifold, PLMap]:
    """Triangulated n-disk and its embedding onto the round disk ``disk``.

    ``resolution`` is the number of segments for n=1, the number of rings for
    n=2 and the number of cube cells per axis for n=3.
    """
    if n not in SUPPORTED_DIMS:
        raise DimensionError(f"disk meshes are only built for n in {SUPPORTED_DIMS}, got {n}")
    if disk.dim != n:
        raise DimensionError(f"disk has dimension {disk.dim}, expected {n}")
    resolution = int(resolution)
    if resolution < 1:
        raise ValueError("resolution must be a positive integer")
    if n == 1:
        simplices, unit = _segment_mesh(resolution)
    elif n == 2:
        simplices, unit = _ring_mesh(resolution)
    else:
        simplices, unit = _ball_mesh(resolution)
    M = SimplicialManifold(n, simplices)
    positions = disk.c + disk.radius * unit
    if n == 1:
        positions[0, 0] = disk.center[0] - disk.radius
        positions[-1, 0] = disk.center[0] + disk.radius
    return M, PLMap(M, positions)


@dataclass(frozen=True)
class ApproximationSequence:
    """A deterministic sequence of (manifold, map) pairs indexed by k = 0, 1, 2, ...

    ``builder`` must be a pure function of k. ``box`` is the domain ix the
    sequence approximates over (``None`` for a 0-dimensional domain).
    """

    n: int
    m: int
    disk: Disk | None
    builder: Callable[[int], tuple[SimplicialManifold, PLMap]]
    declared_bound: float
    box: Box | None = None
    label: str = ""

    def item(self, k: int) -> tuple[SimplicialManifold, PLMap]:
        if k < 0:
            raise IndexError("sequence index must be nonnegative")
        M, g = self.builder(int(k))
        if g.target_dim != self.n + self.m:
            raise DimensionError(f"item {k} maps into R^{g.target_dim}, expected R^{self.n + self.m}")
        return M, g


def max_vertex_norm(g: PLMap) -> float:
    vals = g.vertex_values()
    return float(np.max(np.linalg.norm(vals, axis=1))) if vals.shape[0] else 0.0


def boundary_chord_sag(M: SimplicialManifold, embedding: np.ndarray, disk: Disk) -> float:
    """Largest inward offset from the sphere of ``disk`` of a point on a boundary edge.

    Level-set vertices are interpolated along edges, so on a boundary edge they
    sit inside the sphere by at most the offset of the edge midpoint.
    """
    if M.dim < 2:
        return 0.0
    edges = boundary(M).edges()
    if edges.shape[0] == 0:
        return 0.0
    mid = embedding[edges][..., : disk.dim].mean(axis=1)
    worst = disk.radius - np.linalg.norm(mid - disk.c, axis=1)
    return float(max(0.0, worst.max()))


__all__ = [
    "ApproximationSequence",
    "DimensionError",
    "ManifoldPoint",
    "PLMap",
    "SimplicialManifold",
    "boundary",
    "boundary_chord_sag",
    "build_disk_mesh",
    "evaluate",
    "max_vertex_norm",
]

"""Finite-k checks of the approximation conditions.

Limits cannot be observed from finitely many k, so accumulation is replaced
by a distance trend: the vertex clouds restricted to the box must approach
the graph, with an explicit tolerance at the last index and a slack factor on
monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bump import theta
from .geometry import Box, Disk, Interval
from .mesh import ApproximationSequence, PLMap, SimplicialManifold, boundary, max_vertex_norm
from .oracles import SetValuedOracle

DEFAULT_SLACK = 1.05


@dataclass
class ReportRow:
    k: int
    max_norm: float = math.nan
    semidistance: float = math.nan
    n_in_box: int = 0
    boundary_deviation: float = math.nan
    crossings: int = -1
    epsilon: float = math.nan
    tolerance: float = math.nan

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class VerificationReport:
    rows: list[ReportRow] = field(default_factory=list)
    flags: dict[str, bool] = field(default_factory=dict)
    tolerances: dict[str, float] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def row(self, k: int) -> ReportRow:
        for r in self.rows:
            if r.k == k:
                return r
        r = ReportRow(k)
        self.rows.append(r)
        self.rows.sort(key=lambda r: r.k)
        return r


def check_boundedness(seq: ApproximationSequence, K: int) -> tuple[float, bool]:
    """Largest vertex-value norm over k <= K, and whether it stays within the declared bound."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    bound = max(max_vertex_norm(seq.item(k)[1]) for k in range(K + 1))
    return bound, bound <= seq.declared_bound


def _as_schedule(tol) -> Callable[[int], float]:
    return tol if callable(tol) else (lambda k, _t=float(tol): _t)


def nonincreasing_within(values: Sequence[float], slack: float = DEFAULT_SLACK) -> bool:
    v = list(values)
    return all(b <= slack * a for a, b in zip(v, v[1:]))


def cloud_in_box(g: PLMap, n: int, box: Box | None) -> np.ndarray:
    vals = g.vertex_values()
    if box is None or n == 0:
        return vals
    return vals[box.contains(vals[:, :n])]


def check_accumulation_containment(seq: ApproximationSequence, oracle: SetValuedOracle, box: Box | None,
                                   K: int, tol_schedule=0.0, slack: float = DEFAULT_SLACK,
                                   report: VerificationReport | None = None,
                                   ks: Sequence[int] | None = None) -> VerificationReport:
    """d_k = largest graph distance over vertices with x in ``box``.

    Passes when d_K <= tol(K) and d_{k+1} <= slack * d_k throughout.
    """
    if seq.n != oracle.n or seq.m != oracle.m:
        raise ValueError("sequence and oracle dimensions disagree")
    tol = _as_schedule(tol_schedule)
    report = report or VerificationReport()
    ks = list(ks) if ks is not None else list(range(K + 1))
    d = []
    for k in ks:
        _, g = seq.item(k)
        cloud = cloud_in_box(g, seq.n, box)
        dk = float(np.max(oracle.graph_distances(cloud[:, :seq.n], cloud[:, seq.n:]))) if cloud.shape[0] else 0.0
        row = report.row(k)
        row.semidistance, row.n_in_box, row.tolerance = dk, int(cloud.shape[0]), tol(k)
        d.append(dk)
    report.flags["containment_final"] = d[-1] <= tol(ks[-1])
    report.flags["containment_trend"] = nonincreasing_within(d, slack)
    report.tolerances["containment_final"] = tol(ks[-1])
    report.tolerances["trend_slack"] = slack
    return report


def boundary_sphere_diagnostics(M: SimplicialManifold, g: PLMap, disk: Disk, tol: float = 1e-9) -> dict:
    """Each ingredient of the boundary-sphere check, with the measured deviations."""
    if M.dim < 1:
        raise ValueError("boundary-sphere check needs a manifold of dimension >= 1")
    n = M.dim
    B = boundary(M)
    out = {"pseudomanifold": M.is_pseudomanifold(), "closed": boundary(B).n_simplices == 0}
    if n == 1:
        out["topology"] = B.n_vertices == 2
    elif n == 2:
        out["topology"] = B.n_components() == 1 and B.n_vertices == B.n_simplices
    else:
        out["topology"] = B.n_components() == 1 and B.euler_characteristic() == 2
    out["connected"] = n == 1 or B.n_components() == 1
    vals = g.values[B.vertices]
    if vals.shape[0]:
        x, y = vals[:, : disk.dim], vals[:, disk.dim:]
        radial = float(np.max(np.abs(np.linalg.norm(x - disk.c, axis=1) - disk.radius)))
        lift = float(np.max(np.abs(y))) if y.size else 0.0
    else:
        radial = lift = math.inf
    out["radial_deviation"] = radial
    out["y_deviation"] = lift
    out["location"] = radial <= tol and lift <= tol
    out["injective"] = np.unique(vals, axis=0).shape[0] == vals.shape[0]
    out["passed"] = all(out[key] for key in ("pseudomanifold", "closed", "topology", "connected", "location",
                                            "injective"))
    return out


def check_boundary_sphere(M: SimplicialManifold, g: PLMap, disk: Disk, tol: float = 1e-9) -> bool:
    """PL stand-in for 'g restricted to the boundary is a diffeomorphism onto the sphere x {0}'.

    Passes iff the boundary complex is a closed, connected combinatorial sphere
    of the right kind (two points, a single cycle, or chi = 2), its vertex
    images lie on the sphere of ``disk`` with zero y-part within ``tol``, and
    distinct boundary vertices have distinct images.
    """
    return boundary_sphere_diagnostics(M, g, disk, tol)["passed"]


def check_hypothesis_eq1(oracle: SetValuedOracle, i: int, tix: Interval, box: Box | None,
                         grid: int = 17) -> bool:
    """F_i(x) inside tix for all x in the box: enclosure check plus grid-sampled fibres."""
    bound = oracle.component_bound(i)
    if bound is not None and bound not in tix:
        return False
    if box is None:
        pts = [np.zeros(0)]
    else:
        pts = box.grid(grid)
    for x in pts:
        fib = oracle.fibre(x)
        if fib.shape[0] and not np.all(tix.contains_array(fib[:, i - 1])):
            return False
    return True


def slice_violations(res, cfg, seq: ApproximationSequence) -> list[str]:
    """Structural invariants of one slice; an empty list means all hold."""
    out = []
    M = res.M
    h = res.h_values
    eps = res.epsilon_used
    hv = h[M.vertices]
    if np.any(hv == eps):
        out.append("level attained at a vertex")
    if hv.size and np.min(np.abs(hv - eps)) < cfg.delta_margin:
        out.append("vertex values closer to the level than the margin")
    if abs(eps) >= cfg.tf.alpha:
        out.append("|eps| >= alpha")
    pe = res.parent_edges
    if pe.shape[0]:
        prod = (h[pe[:, 0]] - eps) * (h[pe[:, 1]] - eps)
        if not np.all(prod < 0):
            out.append("parent edge does not straddle the level")
        if not np.all((res.params > 0) & (res.params < 1)):
            out.append("interpolation parameter outside (0, 1)")
    if res.N.n_simplices and res.N.simplices.shape[1] != M.dim:
        out.append("level-set simplex of the wrong dimension")
    if res.N.dim >= 1:
        if not res.N.is_pseudomanifold():
            out.append("level set is not a pseudomanifold")
        bd = set(boundary(res.N).vertices.tolist())
        if bd != set(res.boundary_vertices.tolist()):
            out.append("boundary of N differs from N meet boundary of M")
    elif res.boundary_vertices.size:
        out.append("0-dimensional level set touches the boundary")
    n = seq.n
    j = cfg.j
    lifted = res.lifted.values
    if res.boundary_vertices.size and seq.disk is not None:
        bv = lifted[res.boundary_vertices]
        level = theta(cfg.tf, 0.0) - eps
        scale = max(1.0, abs(level), seq.disk.radius)
        if np.max(np.abs(bv[:, j - 1] - level)) > 1e-12 * scale:
            out.append("boundary vertex off the slicing hyperplane")
        if np.any(bv[:, n:] != 0.0):
            out.append("boundary vertex with nonzero y-part")
        radial = np.linalg.norm(bv[:, :n] - seq.disk.c, axis=1)
        if np.any(radial > seq.disk.radius + 1e-12 * scale):
            out.append("boundary vertex outside the disk")
    if seq.box is not None and lifted.shape[0]:
        rest = seq.box.remove_coord(j)
        xr = np.delete(lifted[:, :n], j - 1, axis=1)
        sel = rest.contains(xr) if rest is not None else np.ones(lifted.shape[0], dtype=bool)
        if np.any(sel) and not np.all(seq.box.contains(lifted[sel, :n])):
            out.append("x_{!=j} in the box but reconstructed x outside it")
    return out

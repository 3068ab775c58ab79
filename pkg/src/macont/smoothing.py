"""Approximation sequences for continuous functions, plus the set-valued step demo.

A continuous f on a box ix is extended to a round disk containing ix, with
value zero on the boundary sphere, then smoothed by a discrete compactly
supported kernel. The k-th item is a disk mesh carrying the graph map
x -> (x, f_k(x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as expr_mod
from .bump import lam
from .geometry import Box, Disk, HypothesisError, Interval
from .mesh import ApproximationSequence, PLMap, build_disk_mesh

# kernel grid nodes per kernel radius, by dimension
_KERNEL_NODES = {1: 16, 2: 8, 3: 4}
_EVAL_CHUNK = 1 << 21
# one-sided difference step, relative to the box width
_FD_STEP = 1e-4


@dataclass(frozen=True)
class ContinuousFunction:
    """Vectorized f : R^n -> R^m; ``fn`` maps an (N, n) array to (N, m)."""

    n: int
    m: int
    fn: Callable[[np.ndarray], np.ndarray]
    domain: Box
    enclosure: Callable[[Box], list[Interval]] | None = None
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X2 = X.reshape(-1, self.n)
        out = np.asarray(self.fn(X2), dtype=float).reshape(X2.shape[0], self.m)
        return out[0] if single else out

    @classmethod
    def from_expressions(cls, texts: Sequence[str], domain: Box, label: str = "") -> "ContinuousFunction":
        n = domain.dim
        nodes = [expr_mod.parse(t, n_vars=n) for t in texts]

        def fn(X):
            return np.column_stack([np.broadcast_to(expr_mod.evaluate(node, X), (X.shape[0],))
                                    for node in nodes])

        def enclosure(box):
            return [expr_mod.enclose(node, box) for node in nodes]

        return cls(n, len(nodes), fn, domain, enclosure, label or "; ".join(texts))

    def sup_norms(self) -> np.ndarray:
        """Per-component bound on |f_i| over the domain (enclosure when available, else sampled)."""
        if self.enclosure is not None:
            enc = self.enclosure(self.domain)
            b = np.array([max(abs(iv.lo), abs(iv.hi)) for iv in enc])
            if np.all(np.isfinite(b)):
                return b
        sample = self(self.domain.grid({1: 4097, 2: 129}.get(self.n, 33)))
        return 1.25 * np.max(np.abs(sample), axis=0) + 1e-12


@dataclass(frozen=True)
class SmoothingSchedule:
    """Kernel widths delta_k = delta0 * delta_ratio^k and mesh resolutions r_k = r0 * r_ratio^k."""

    delta0: float = 0.4
    delta_ratio: float = 0.5
    r0: int = 8
    r_ratio: int = 2
    k_max: int = 8

    def __post_init__(self):
        if not self.delta0 > 0 or not 0 < self.delta_ratio < 1:
            raise ValueError("kernel widths must be positive and strictly decreasing")
        if self.r0 < 1 or self.r_ratio < 2:
            raise ValueError("mesh resolutions must be positive and strictly increasing")

    def delta(self, k: int) -> float:
        return self.delta0 * self.delta_ratio ** k

    def resolution(self, k: int) -> int:
        return int(self.r0 * self.r_ratio ** k)


def taper(X: np.ndarray, ix: Box, disk: Disk) -> np.ndarray:
    """1 on ix, 0 on and outside the sphere; 1 - lam(d / (d + gap)) in between.

    d is the distance to ix and gap = R - |x - c|. Since lam is flat at 0 the
    taper is smooth across the faces of ix; lam(1/2) = 1/2 so the midpoint of
    the gap maps to 1/2, as a linear radial ramp would.
    """
    X = np.asarray(X, dtype=float).reshape(-1, disk.dim)
    gap = disk.radius - np.linalg.norm(X - disk.c, axis=1)
    d = ix.distance(X)
    inside = d == 0.0
    out = np.zeros(X.shape[0])
    out[inside] = 1.0
    mid = ~inside & (gap > 0.0)
    out[mid] = 1.0 - lam(d[mid] / (gap[mid] + d[mid]))
    return out


def _tangent_extension(f: ContinuousFunction, ix: Box, X: np.ndarray) -> np.ndarray:
    """f(c) + Df(c)(x - c) with c the nearest point of ix, by a one-sided second-order difference.

    The step runs from c back into ix along x - c, so f is only sampled on ix.
    """
    C = ix.clamp(X)
    V = X - C
    norm = np.linalg.norm(V, axis=1)
    step = _FD_STEP * float(np.max(ix.hi - ix.lo))
    U = V * (step / norm)[:, None]
    f0, f1, f2 = f(C), f(C - U), f(C - 2.0 * U)
    slope = (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * step)
    return f0 + norm[:, None] * slope


@dataclass(frozen=True)
class ExtendedFunction(ContinuousFunction):
    """f extended from ix to the disk; zero on and outside its sphere."""

    base: ContinuousFunction = field(default=None)
    ix: Box = field(default=None)
    disk: Disk = field(default=None)

    def taper(self, X) -> np.ndarray:
        return taper(X, self.ix, self.disk)


def extend_to_disk(f: ContinuousFunction, ix: Box, disk: Disk) -> ExtendedFunction:
    """Continuous extension equal to f on ix and to 0 on the boundary of ``disk``.

    Outside ix the value is taper(x) * (first-order expansion of f at the
    nearest point of ix), which is C^1 across the faces of ix, so smoothing
    error near the faces is second order in the kernel width.
    """
    if not disk.contains_box(ix, strict=True):
        raise HypothesisError(f"box {ix.coords} is not inside the interior of {disk}")

    def fn(X):
        inside = ix.contains(X)
        out = np.empty((X.shape[0], f.m))
        if inside.any():
            out[inside] = f(X[inside])
        rest = ~inside
        if rest.any():
            out[rest] = taper(X[rest], ix, disk)[:, None] * _tangent_extension(f, ix, X[rest])
        return out

    lo = disk.c - disk.radius
    hi = disk.c + disk.radius
    return ExtendedFunction(f.n, f.m, fn, Box.from_bounds(list(zip(lo, hi))), None,
                            f"ext({f.label})", base=f, ix=ix, disk=disk)


def kernel_stencil(n: int, width: float, nodes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and normalized weights of the (1 - (|t|/width)^2)^4 kernel on a regular grid."""
    q = nodes or _KERNEL_NODES.get(n, 4)
    axis = np.arange(-q, q + 1) * (width / q)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    offsets = np.stack([g.ravel() for g in mesh], axis=-1)
    r2 = np.sum(offsets ** 2, axis=1) / width ** 2
    keep = r2 < 1.0
    offsets = offsets[keep]
    w = (1.0 - r2[keep]) ** 4
    return offsets, w / w.sum()


def mollify(fext: ContinuousFunction, width: float, nodes: int | None = None) -> ContinuousFunction:
    """Discrete convolution of ``fext`` with a unit-mass kernel of radius ``width``.

    When ``fext`` came from :func:`extend_to_disk`, the result is multiplied by
    the same taper, so it stays equal to the convolution on ix and vanishes on
    the sphere.
    """
    if not width > 0:
        raise ValueError("kernel width must be positive")
    offsets, w = kernel_stencil(fext.n, width, nodes)
    K = offsets.shape[0]
    factor = getattr(fext, "taper", None)

    def fn(X):
        out = np.empty((X.shape[0], fext.m))
        step = max(1, _EVAL_CHUNK // K)
        for s in range(0, X.shape[0], step):
            x = X[s:s + step]
            Z = (x[:, None, :] - offsets[None, :, :]).reshape(-1, fext.n)
            vals = fext(Z).reshape(x.shape[0], K, fext.m)
            out[s:s + step] = np.einsum("k,nkm->nm", w, vals)
        if factor is not None:
            out *= factor(X)[:, None]
        return out

    return ContinuousFunction(fext.n, fext.m, fn, fext.domain, None, f"mollify({fext.label}, {width!r})")


def _bound(disk: Disk, y_bounds) -> float:
    x_part = float(np.linalg.norm(disk.c)) + disk.radius
    return math.sqrt(x_part ** 2 + float(np.sum(np.square(y_bounds)))) * (1.0 + 1e-12)


def _extension_sup(f: ContinuousFunction, fext: ExtendedFunction) -> np.ndarray:
    """Bound on |fext_i|, which also bounds every smoothed item (averages of fext times a taper <= 1).

    Inside ix this is the enclosure of f; the first-order tail outside ix is
    sampled on a grid and padded by 25%.
    """
    sample = fext(fext.domain.grid({1: 4097, 2: 257}.get(f.n, 49)))
    return np.maximum(f.sup_norms(), 1.25 * np.max(np.abs(sample), axis=0))


def make_sequence(f: ContinuousFunction, ix: Box, disk: Disk,
                  sched: SmoothingSchedule | None = None) -> ApproximationSequence:
    """k-th item: disk mesh at resolution r_k with vertex values (p, f_k(p)), f_k the smoothed extension."""
    sched = sched or SmoothingSchedule()
    if f.n != ix.dim or disk.dim != ix.dim:
        raise ValueError("function, box and disk dimensions disagree")
    fext = extend_to_disk(f, ix, disk)

    def build(k):
        M, emb = build_disk_mesh(f.n, disk, sched.resolution(k))
        P = emb.values
        fk = mollify(fext, sched.delta(k))
        Y = fk(P)
        Y[M.boundary_vertices] = 0.0
        return M, PLMap(M, np.hstack([P, Y]))

    return ApproximationSequence(f.n, f.m, disk, build, _bound(disk, _extension_sup(f, fext)), ix, f.label)


def default_steepness(k: int) -> float:
    return 4.0 * 2.0 ** k


STEP_BOX = Box.cube(1)
STEP_DISK = Disk((0.0,), 1.5)


def make_step_sequence(steepness: Callable[[int], float] = default_steepness,
                       sched: SmoothingSchedule | None = None) -> ApproximationSequence:
    """tanh(s_k x) times the disk taper on [-1.5, 1.5]; converges to the filled step on [-1, 1]."""
    sched = sched or SmoothingSchedule()

    def build(k):
        M, emb = build_disk_mesh(1, STEP_DISK, sched.resolution(k))
        P = emb.values
        Y = np.tanh(steepness(k) * P) * taper(P, STEP_BOX, STEP_DISK)[:, None]
        Y[M.boundary_vertices] = 0.0
        return M, PLMap(M, np.hstack([P, Y]))

    return ApproximationSequence(1, 1, STEP_DISK, build, _bound(STEP_DISK, [1.0]), STEP_BOX, "step")

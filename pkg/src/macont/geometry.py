"""Closed intervals, boxes and round disks."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class HypothesisError(ValueError):
    """An inclusion hypothesis (strict containment) does not hold."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v)

    @classmethod
    def hull(cls, values: Iterable[float]) -> "Interval":
        vals = [float(v) for v in values]
        return cls(min(vals), max(vals))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, v) -> bool:
        if isinstance(v, Interval):
            return self.lo <= v.lo and v.hi <= self.hi
        return self.lo <= v <= self.hi

    def contains_array(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v >= self.lo) & (v <= self.hi)

    def strictly_inside(self, other: "Interval") -> bool:
        """True when self is contained in the interior of ``other``."""
        return other.lo < self.lo and self.hi < other.hi

    def union(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    # natural interval extension of the arithmetic operators

    def __add__(self, other):
        o = _as_interval(other)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other):
        o = _as_interval(other)
        return Interval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _as_interval(other) - self

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other):
        o = _as_interval(other)
        # 0 * inf counts as 0, the usual convention for interval endpoints
        prods = [0.0 if math.isnan(p) else p
                 for p in (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)]
        return Interval(min(prods), max(prods))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_interval(other)
        if o.lo <= 0.0 <= o.hi:
            return Interval(-math.inf, math.inf)
        # an overflowing reciprocal keeps a finite inner endpoint so the enclosure stays valid
        lo, hi = 1.0 / o.hi, 1.0 / o.lo
        if o.lo > 0.0:
            lo = min(lo, sys.float_info.max)
        else:
            hi = max(hi, -sys.float_info.max)
        return self * Interval(lo, hi)

    def __rtruediv__(self, other):
        return _as_interval(other) / self

    def __pow__(self, other):
        o = _as_interval(other)
        if o.lo == o.hi and float(o.lo).is_integer():
            p = int(o.lo)
            if p == 0:
                return Interval(1.0, 1.0)
            if p < 0:
                return Interval(1.0, 1.0) / (self ** Interval.point(-p))
            a, b = self.lo ** p, self.hi ** p
            if p % 2 == 1:
                return Interval(a, b)
            if self.lo >= 0.0:
                return Interval(a, b)
            if self.hi <= 0.0:
                return Interval(b, a)
            return Interval(0.0, max(a, b))
        if self.lo <= 0.0:
            # real powers are only defined for positive bases
            return Interval(-math.inf, math.inf)
        return exp_interval(o * log_interval(self))

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


def _as_interval(v) -> Interval:
    return v if isinstance(v, Interval) else Interval.point(float(v))


def exp_interval(x: Interval) -> Interval:
    return Interval(math.exp(min(x.lo, 709.0)) if x.lo > -math.inf else 0.0,
                    math.exp(min(x.hi, 709.0)) if x.hi < 709.0 else math.inf)


def log_interval(x: Interval) -> Interval:
    lo = math.log(x.lo) if x.lo > 0 else -math.inf
    hi = math.log(x.hi) if x.hi > 0 else -math.inf
    return Interval(lo, hi)


def sqrt_interval(x: Interval) -> Interval:
    if x.hi < 0:
        raise ValueError(f"sqrt of negative interval {x}")
    return Interval(math.sqrt(max(0.0, x.lo)), math.sqrt(x.hi))


def _periodic_enclosure(x: Interval, fn, phase: float) -> Interval:
    # extrema of sin/cos sit at phase + k*pi/2 offsets; check every one inside x
    if x.width >= 2 * math.pi or not math.isfinite(x.width):
        return Interval(-1.0, 1.0)
    vals = [fn(x.lo), fn(x.hi)]
    k = math.ceil((x.lo - phase) / math.pi)
    t = phase + k * math.pi
    while t <= x.hi:
        vals.append(fn(t))
        t += math.pi
    return Interval(max(-1.0, min(vals)), min(1.0, max(vals)))


def sin_interval(x: Interval) -> Interval:
    return _periodic_enclosure(x, math.sin, math.pi / 2)


def cos_interval(x: Interval) -> Interval:
    return _periodic_enclosure(x, math.cos, 0.0)


@dataclass(frozen=True)
class Box:
    coords: tuple[Interval, ...]

    def __post_init__(self):
        coords = tuple(c if isinstance(c, Interval) else Interval(*c) for c in self.coords)
        if not coords:
            raise ValueError("a box needs at least one coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "Box":
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @classmethod
    def cube(cls, n: int, lo: float = -1.0, hi: float = 1.0) -> "Box":
        return cls(tuple(Interval(lo, hi) for _ in range(n)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, j: int) -> Interval:
        """1-based coordinate access, ``box[1]`` is the first interval."""
        if not 1 <= j <= self.dim:
            raise IndexError(f"coordinate {j} out of range 1..{self.dim}")
        return self.coords[j - 1]

    @property
    def lo(self) -> np.ndarray:
        return np.array([c.lo for c in self.coords])

    @property
    def hi(self) -> np.ndarray:
        return np.array([c.hi for c in self.coords])

    def remove_coord(self, j: int) -> "Box | None":
        """Drop coordinate ``j`` (1-based); a 1-box collapses to ``None`` (R^0)."""
        self[j]
        rest = self.coords[: j - 1] + self.coords[j:]
        return Box(rest) if rest else None

    def corners(self) -> np.ndarray:
        grids = np.meshgrid(*[[c.lo, c.hi] for c in self.coords], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def contains(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= self.lo) & (x <= self.hi), axis=-1)
        return bool(inside) if inside.ndim == 0 else inside

    def clamp(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def distance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x - self.clamp(x), axis=-1)

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [np.linspace(c.lo, c.hi, per_axis) for c in self.coords]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


@dataclass(frozen=True)
class Disk:
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        center = tuple(float(c) for c in np.atleast_1d(self.center))
        if not center:
            raise ValueError("disk center must have at least one coordinate")
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def c(self) -> np.ndarray:
        return np.array(self.center)

    def farthest_corner_distance(self, box: Box) -> float:
        return float(np.max(np.linalg.norm(box.corners() - self.c, axis=1)))

    def contains_box(self, box: Box, strict: bool = True) -> bool:
        if box.dim != self.dim:
            raise ValueError(f"box has dim {box.dim}, disk has dim {self.dim}")
        d = self.farthest_corner_distance(box)
        return d < self.radius if strict else d <= self.radius

    def slice(self, j: int, level: float) -> "Disk":
        """Intersection with the hyperplane ``x_j = level``, as a disk in the remaining coordinates."""
        offset = level - self.center[j - 1]
        if abs(offset) >= self.radius:
            raise ValueError(f"hyperplane x_{j}={level} misses the disk")
        center = self.center[: j - 1] + self.center[j:]
        return Disk(center, math.sqrt(self.radius ** 2 - offset ** 2))

"""Set-valued maps represented as black boxes: fibre membership and distance to the graph.

All distances are Euclidean in the product space R^n x R^m.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .geometry import Box, Interval

# graph sample density per input dimension (function graphs and derived slices)
_GRAPH_SAMPLES = {1: 2049, 2: 129, 3: 33}
_SLICE_SAMPLES = {1: 4097, 2: 257, 3: 41}
_ROOT_SCAN = 129
ROOT_TOL = 1e-12


def _split(points, n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    if P.shape[1] != n + m:
        raise ValueError(f"points have {P.shape[1]} coordinates, oracle expects {n + m}")
    return P[:, :n], P[:, n:]


class SetValuedOracle(ABC):
    """F : box subset of R^n -> subsets of R^m."""

    n: int
    m: int
    box: Box | None

    @abstractmethod
    def fibre(self, x) -> np.ndarray:
        """A finite sample of F(x) as rows (exact for finite fibres)."""

    @abstractmethod
    def contains(self, x, y, tol: float = 0.0) -> bool:
        """Whether y lies within ``tol`` of F(x)."""

    @abstractmethod
    def graph_distances(self, X, Y) -> np.ndarray:
        """Distance of each (X[k], Y[k]) to the graph {(x, y) : y in F(x)}."""

    @abstractmethod
    def component_bound(self, i: int) -> Interval | None:
        """Enclosure of F_i over the box (1-based ``i``), ``None`` when F is empty."""

    def graph_distance(self, x, y) -> float:
        X = np.asarray(x, dtype=float).reshape(1, self.n)
        Y = np.asarray(y, dtype=float).reshape(1, self.m)
        return float(self.graph_distances(X, Y)[0])

    def _check_xy(self, X, Y):
        X = np.asarray(X, dtype=float).reshape(-1, self.n) if self.n else np.zeros((len(np.atleast_2d(Y)), 0))
        Y = np.asarray(Y, dtype=float).reshape(-1, self.m)
        if X.shape[0] != Y.shape[0]:
            raise ValueError("X and Y must have the same number of rows")
        return X, Y


def graph_semidistance(cloud, oracle: SetValuedOracle) -> float:
    """Largest graph distance over a cloud of points (x, y) in R^(n+m); 0 for an empty cloud."""
    P = np.asarray(cloud, dtype=float)
    if P.size == 0:
        return 0.0
    X, Y = _split(P, oracle.n, oracle.m)
    return float(np.max(oracle.graph_distances(X, Y)))


class StepOracle(SetValuedOracle):
    """F(x) = {-1} for x < 0, {+1} for x > 0 and [-1, 1] at 0, on [-1, 1]."""

    n, m = 1, 1

    def __init__(self):
        self.box = Box.cube(1)
        pts = np.array([[-1.0, -1.0], [0.0, -1.0], [0.0, 1.0], [1.0, 1.0]])
        self._seg_a, self._seg_b = pts[:-1], pts[1:]

    def fibre(self, x):
        x = float(np.ravel(x)[0])
        if not self.box.contains([x]):
            return np.empty((0, 1))
        if x == 0.0:
            return np.linspace(-1.0, 1.0, 201)[:, None]
        return np.array([[math.copysign(1.0, x)]])

    def contains(self, x, y, tol=0.0):
        x = float(np.ravel(x)[0])
        y = float(np.ravel(y)[0])
        if not -1.0 <= x <= 1.0:
            return False
        if x == 0.0:
            return -1.0 - tol <= y <= 1.0 + tol
        return abs(y - math.copysign(1.0, x)) <= tol

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        return _kernels.polyline_distance(np.hstack([X, Y]), self._seg_a, self._seg_b)

    def component_bound(self, i):
        if i != 1:
            raise IndexError(i)
        return Interval(-1.0, 1.0)


class FullOracle(SetValuedOracle):
    """Graph is all of R^n x R^m."""

    def __init__(self, n: int, m: int, box: Box | None = None):
        self.n, self.m, self.box = n, m, box

    def fibre(self, x):
        return np.zeros((1, self.m))

    def contains(self, x, y, tol=0.0):
        return True

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        return np.zeros(Y.shape[0])

    def component_bound(self, i):
        return Interval(-math.inf, math.inf)


class EmptyOracle(SetValuedOracle):
    def __init__(self, n: int, m: int, box: Box | None = None):
        self.n, self.m, self.box = n, m, box

    def fibre(self, x):
        return np.empty((0, self.m))

    def contains(self, x, y, tol=0.0):
        return False

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        return np.full(Y.shape[0], np.inf)

    def component_bound(self, i):
        return None


class ConstantOracle(SetValuedOracle):
    """F(x) = {value} on ``region`` (a sub-box of ``box``) and empty elsewhere."""

    def __init__(self, value, box: Box, region: Box | None = None):
        self.value = np.atleast_1d(np.asarray(value, dtype=float))
        self.n, self.m = box.dim, self.value.shape[0]
        self.box = box
        self.region = region if region is not None else box

    def fibre(self, x):
        return self.value[None, :].copy() if self.region.contains(np.ravel(x)) else np.empty((0, self.m))

    def contains(self, x, y, tol=0.0):
        return bool(self.region.contains(np.ravel(x))) and \
            float(np.linalg.norm(np.ravel(y) - self.value)) <= tol

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        dx = self.region.distance(X)
        dy = np.linalg.norm(Y - self.value, axis=1)
        return np.hypot(dx, dy)

    def component_bound(self, i):
        return Interval.point(self.value[i - 1])


class PointSetOracle(SetValuedOracle):
    """A subset of R^m seen as a map on R^0; finite."""

    n = 0

    def __init__(self, points):
        P = np.asarray(points, dtype=float)
        self.points = P.reshape(P.shape[0], -1) if P.size else np.empty((0, P.shape[-1] if P.ndim > 1 else 1))
        self.m = self.points.shape[1]
        self.box = None

    def is_nonempty(self) -> bool:
        return self.points.shape[0] > 0

    def fibre(self, x=()):
        return self.points.copy()

    def contains(self, x, y, tol=0.0):
        if not self.is_nonempty():
            return False
        return bool(np.min(np.linalg.norm(self.points - np.ravel(y), axis=1)) <= tol)

    def graph_distances(self, X, Y):
        _, Y = self._check_xy(X, Y)
        if not self.is_nonempty():
            return np.full(Y.shape[0], np.inf)
        d, _ = cKDTree(self.points).query(Y)
        return np.asarray(d, dtype=float)

    def component_bound(self, i):
        if not self.is_nonempty():
            return None
        return Interval.hull(self.points[:, i - 1])


class FunctionGraphOracle(SetValuedOracle):
    """F(x) = {f(x)} for a continuous f on ``f.domain``.

    The distance to the graph is found by projecting onto a dense sample of
    the graph and polishing with projected Gauss-Newton steps on
    ||t - x||^2 + ||f(t) - y||^2 over t in the box.
    """

    def __init__(self, f, gn_steps: int = 16):
        self.f = f
        self.n, self.m = f.n, f.m
        self.box = f.domain
        self.gn_steps = gn_steps

    @cached_property
    def _sample(self):
        T = self.box.grid(_GRAPH_SAMPLES.get(self.n, 17))
        FT = self.f(T)
        return T, FT, cKDTree(np.hstack([T, FT]))

    def fibre(self, x):
        x = np.ravel(np.asarray(x, dtype=float))
        if not self.box.contains(x):
            return np.empty((0, self.m))
        return self.f(x[None, :])

    def contains(self, x, y, tol=0.0):
        fib = self.fibre(x)
        return fib.shape[0] > 0 and float(np.linalg.norm(fib[0] - np.ravel(y))) <= tol

    def _jacobian(self, T):
        h = 1e-6 * np.maximum(1.0, self.box.hi - self.box.lo)
        J = np.empty((T.shape[0], self.m, self.n))
        for c in range(self.n):
            step = np.zeros(self.n)
            step[c] = h[c]
            J[:, :, c] = (self.f(T + step) - self.f(T - step)) / (2.0 * h[c])
        return J

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        T0, FT0, tree = self._sample
        d0, idx = tree.query(np.hstack([X, Y]))
        T = T0[idx].copy()
        lo, hi = self.box.lo, self.box.hi

        def objective(T):
            return np.sum((T - X) ** 2, axis=1) + np.sum((self.f(T) - Y) ** 2, axis=1)

        obj = objective(T)
        eye = np.eye(self.n)
        for _ in range(self.gn_steps):
            J = self._jacobian(T)
            r2 = self.f(T) - Y
            A = eye[None] + np.einsum("kmi,kmj->kij", J, J)
            g = (T - X) + np.einsum("kmi,km->ki", J, r2)
            delta = -np.linalg.solve(A, g[..., None])[..., 0]
            step = np.ones(T.shape[0])
            accepted = np.zeros(T.shape[0], dtype=bool)
            for _ in range(6):
                cand = np.clip(T + step[:, None] * delta, lo, hi)
                cobj = objective(cand)
                better = (cobj < obj) & ~accepted
                T[better] = cand[better]
                obj[better] = cobj[better]
                accepted |= better
                step = np.where(accepted, step, 0.5 * step)
            if not accepted.any():
                break
        return np.minimum(np.sqrt(obj), d0)

    def component_bound(self, i):
        if getattr(self.f, "enclosure", None) is not None:
            return self.f.enclosure(self.box)[i - 1]
        _, FT, _ = self._sample
        return Interval.hull(FT[:, i - 1])


def _insert_coord(Xr: np.ndarray, j: int, t: np.ndarray) -> np.ndarray:
    return np.insert(Xr, j - 1, t, axis=1)


class DiagonalSliceOracle(SetValuedOracle):
    """G(x_{!=j}) = {y in F(x) : y_i = x_j}, derived from a single-valued parent F = {f}.

    Fibres are computed by scanning x_j over the parent interval for sign
    changes of t - f_i(x with x_j = t) and bisecting each bracket to
    ``ROOT_TOL``. Graph distances use a dense sample of G: a polyline through
    the roots when G has one input coordinate, a nearest-sample query for two
    or more, and the exact finite set when G has none.
    """

    def __init__(self, parent: FunctionGraphOracle, i: int, j: int):
        if not isinstance(parent, FunctionGraphOracle):
            raise TypeError("diagonal slices are computed for single-valued (function graph) parents")
        if not 1 <= i <= parent.m or not 1 <= j <= parent.n:
            raise IndexError(f"slice indices i={i}, j={j} out of range for n={parent.n}, m={parent.m}")
        self.parent = parent
        self.i, self.j = i, j
        self.n, self.m = parent.n - 1, parent.m
        self.box = parent.box.remove_coord(j)
        self._xj = parent.box[j]

    def fibres(self, Xr: np.ndarray) -> list[np.ndarray]:
        """Fibres G(x) for each row of ``Xr`` (shape (N, n-1))."""
        Xr = np.asarray(Xr, dtype=float)
        if self.n:
            Xr = Xr.reshape(-1, self.n)
        else:
            Xr = Xr.reshape(Xr.shape[0] if Xr.ndim == 2 else 1, 0)
        N = Xr.shape[0]
        f = self.parent.f
        ts = np.linspace(self._xj.lo, self._xj.hi, _ROOT_SCAN)

        def phi(rows, t):
            return t - f(_insert_coord(Xr[rows], self.j, t))[:, self.i - 1]

        rows = np.repeat(np.arange(N), _ROOT_SCAN)
        tt = np.tile(ts, N)
        vals = phi(rows, tt).reshape(N, _ROOT_SCAN)
        roots_r, roots_t = [], []
        zr, zc = np.nonzero(vals == 0.0)
        roots_r.append(zr)
        roots_t.append(ts[zc])
        br, bc = np.nonzero(vals[:, :-1] * vals[:, 1:] < 0.0)
        a, b = ts[bc].copy(), ts[bc + 1].copy()
        fa = vals[br, bc]
        iters = int(math.ceil(math.log2(max(self._xj.width / (_ROOT_SCAN - 1), ROOT_TOL) / ROOT_TOL))) + 1
        for _ in range(iters):
            mid = 0.5 * (a + b)
            fm = phi(br, mid)
            left = np.sign(fm) == np.sign(fa)
            a = np.where(left, mid, a)
            fa = np.where(left, fm, fa)
            b = np.where(left, b, mid)
        roots_r.append(br)
        roots_t.append(0.5 * (a + b))
        r = np.concatenate(roots_r)
        t = np.concatenate(roots_t)
        order = np.lexsort((t, r))
        r, t = r[order], t[order]
        Y = f(_insert_coord(Xr[r], self.j, t)) if r.size else np.empty((0, self.m))
        out = [np.empty((0, self.m)) for _ in range(N)]
        if r.size:
            splits = np.searchsorted(r, np.arange(N + 1))
            for k in range(N):
                out[k] = Y[splits[k]:splits[k + 1]]
        return out

    def fibre(self, x=()):
        xr = np.ravel(np.asarray(x, dtype=float))
        if self.n and not self.box.contains(xr):
            return np.empty((0, self.m))
        return self.fibres(xr.reshape(1, self.n))[0]

    def contains(self, x, y, tol=0.0):
        xr = np.ravel(np.asarray(x, dtype=float))
        y = np.ravel(np.asarray(y, dtype=float))
        full = _insert_coord(xr.reshape(1, -1), self.j, np.array([y[self.i - 1]]))[0]
        if not self.parent.box.contains(full):
            return False
        return self.parent.contains(full, y, tol)

    @cached_property
    def _graph(self):
        if self.n == 0:
            return self.fibres(np.zeros((1, 0)))[0], None
        G = self.box.grid(_SLICE_SAMPLES.get(self.n, 17))
        fibs = self.fibres(G)
        pts = [np.hstack([np.repeat(G[k:k + 1], len(fb), axis=0), fb]) for k, fb in enumerate(fibs)]
        if self.n == 1:
            seg_a, seg_b = [], []
            for k, p in enumerate(pts):
                nxt = pts[k + 1] if k + 1 < len(pts) else None
                if nxt is not None and len(nxt) == len(p) and len(p):
                    seg_a.append(p)
                    seg_b.append(nxt)
                elif len(p):
                    seg_a.append(p)
                    seg_b.append(p)
            if not seg_a:
                return np.empty((0, self.n + self.m)), None
            return np.concatenate(seg_a), np.concatenate(seg_b)
        allpts = np.concatenate(pts) if pts else np.empty((0, self.n + self.m))
        return allpts, None

    def graph_distances(self, X, Y):
        X, Y = self._check_xy(X, Y)
        a, b = self._graph
        if a.shape[0] == 0:
            return np.full(Y.shape[0], np.inf)
        P = np.hstack([X, Y])
        if b is not None:
            return _kernels.polyline_distance(P, a, b)
        d, _ = cKDTree(a).query(P)
        return np.asarray(d, dtype=float)

    def sample_points(self) -> np.ndarray:
        """The dense graph sample (rows (x_{!=j}, y)) used for distances."""
        return self._graph[0]

    def component_bound(self, i):
        return self.parent.component_bound(i)

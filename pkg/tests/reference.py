"""Independent reference computations used as test oracles.

Nothing here imports the package: each quantity is recomputed from first
principles with plain numpy / scipy.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def parabola_distance(x, y, lo=-1.0, hi=1.0, samples=200001):
    """Euclidean distance from (x, y) to {(t, t^2) : t in [lo, hi]}: dense scan, then bounded Brent polish."""
    t = np.linspace(lo, hi, samples)
    d2 = (t - x) ** 2 + (t * t - y) ** 2
    k = int(np.argmin(d2))
    a, b = t[max(k - 1, 0)], t[min(k + 1, samples - 1)]
    res = minimize_scalar(lambda s: (s - x) ** 2 + (s * s - y) ** 2, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-14})
    return float(np.sqrt(min(res.fun, d2[k])))


def bisect(fn, a, b, tol=1e-12):
    """Vectorized bisection of fn on brackets [a, b] with a sign change."""
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    fa = fn(a)
    while np.max(b - a) > tol:
        m = 0.5 * (a + b)
        fm = fn(m)
        left = np.sign(fm) == np.sign(fa)
        a, fa, b = np.where(left, m, a), np.where(left, fm, fa), np.where(left, b, m)
    return 0.5 * (a + b)


def quadratic_slice_curve(samples=20001, tol=1e-10):
    """Points (x2, y) with y the root in [0, 1/2] of y - (y^2 + x2^2)/4, x2 in [-1, 1]."""
    x2 = np.linspace(-1.0, 1.0, samples)
    y = bisect(lambda t: t - (t * t + x2 * x2) / 4.0, np.zeros_like(x2), np.full_like(x2, 0.5), tol)
    return np.column_stack([x2, y])


def polyline_distance(P, V):
    """Distance of each row of P to the polyline through the rows of V."""
    A, B = V[:-1], V[1:]
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    out = np.empty(P.shape[0])
    for k, p in enumerate(P):
        t = np.clip(np.einsum("ij,ij->i", p - A, AB) / L2, 0.0, 1.0)
        Q = A + t[:, None] * AB
        out[k] = np.sqrt(np.min(np.einsum("ij,ij->i", p - Q, p - Q)))
    return out


def brute_convolution_1d(f, x, width, q):
    """Discrete (1 - (t/width)^2)^4 average of f around x on a q-per-radius grid, written out longhand."""
    num = den = 0.0
    for s in range(-q, q + 1):
        t = s * width / q
        r2 = (t / width) ** 2
        if r2 >= 1.0:
            continue
        w = (1.0 - r2) ** 4
        num += w * f(x - t)
        den += w
    return num / den


def simplex_measure(P):
    """Unsigned volume of a simplex given its vertex rows."""
    d = P.shape[0] - 1
    M = P[1:] - P[0]
    return abs(np.linalg.det(M)) / float(np.prod(np.arange(1, d + 1)))

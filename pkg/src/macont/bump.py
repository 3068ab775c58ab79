"""Smooth step and the saturating transition function.

``theta`` is the identity on an inner interval and flattens out smoothly on
either side so that ``theta(y) + eps`` stays inside the outer interval for
every ``|eps| <= alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .geometry import HypothesisError, Interval

# nodes of the cached primitive of 1 - lambda on [0, 1]
_GRID_SIZE = 2049


def lam(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly increasing in between.

    Built from exp(-1/t) as e^(-1/t) / (e^(-1/t) + e^(-1/(1-t))), written in a
    form that does not underflow to 0/0.
    """
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    inner = (t > 0.0) & (t < 1.0)
    if np.any(inner):
        u = t[inner]
        expo = np.clip(1.0 / u - 1.0 / (1.0 - u), -700.0, 700.0)
        out[inner] = 1.0 / (1.0 + np.exp(expo))
    return out if out.ndim else float(out)


def make_alpha(outer: Interval, inner: Interval) -> float:
    """Half the smaller end gap between ``inner`` and ``outer``; needs strict inclusion."""
    if not inner.strictly_inside(outer):
        raise HypothesisError(f"inner interval {inner} is not inside the interior of {outer}")
    return 0.5 * min(abs(outer.lo - inner.lo), abs(outer.hi - inner.hi))


def _one_minus_lam(t: float) -> float:
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    expo = min(700.0, max(-700.0, 1.0 / t - 1.0 / (1.0 - t)))
    return 1.0 - 1.0 / (1.0 + math.exp(expo))


@lru_cache(maxsize=None)
def _primitive_table():
    """Hermite interpolant of s -> int_0^s (1 - lam), plus its total mass on [0, 1]."""
    nodes = np.linspace(0.0, 1.0, _GRID_SIZE)
    pieces = [quad(_one_minus_lam, a, b, epsabs=1e-13, epsrel=1e-13)[0]
              for a, b in zip(nodes[:-1], nodes[1:])]
    values = np.concatenate([[0.0], np.cumsum(pieces)])
    slopes = 1.0 - lam(nodes)
    return CubicHermiteSpline(nodes, values, slopes), float(values[-1])


def c_lambda() -> float:
    """Mass of 1 - lam over [0, 1] (numerically; 1/2 by the symmetry lam(t) + lam(1-t) = 1)."""
    return _primitive_table()[1]


def _saturation_bounds(outer: Interval, alpha: float) -> tuple[float, float]:
    # largest hi_sat with fl(hi_sat + alpha) <= outer.hi, smallest lo_sat with fl(lo_sat - alpha) >= outer.lo
    hi_sat = outer.hi - alpha
    while hi_sat + alpha > outer.hi:
        hi_sat = math.nextafter(hi_sat, -math.inf)
    lo_sat = outer.lo + alpha
    while lo_sat - alpha < outer.lo:
        lo_sat = math.nextafter(lo_sat, math.inf)
    return lo_sat, hi_sat


@dataclass(frozen=True)
class TransitionFunction:
    outer: Interval
    inner: Interval
    alpha: float = field(init=False)
    scale_lo: float = field(init=False)
    scale_hi: float = field(init=False)
    sat_lo: float = field(init=False)
    sat_hi: float = field(init=False)

    def __post_init__(self):
        alpha = make_alpha(self.outer, self.inner)
        lo_sat, hi_sat = _saturation_bounds(self.outer, alpha)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "sat_lo", lo_sat)
        object.__setattr__(self, "sat_hi", hi_sat)
        # the added mass scale * c_lambda reaches the saturation level exactly
        mass = c_lambda()
        object.__setattr__(self, "scale_hi", (self.outer.hi - alpha - self.inner.hi) / mass)
        object.__setattr__(self, "scale_lo", (self.inner.lo - (self.outer.lo + alpha)) / mass)

    def __call__(self, y):
        return theta(self, y)


def theta(tf: TransitionFunction, y):
    """Monotone map equal to ``y`` on ``tf.inner``, saturating inside ``tf.outer`` with margin alpha."""
    y_in = np.asarray(y, dtype=float)
    y = np.atleast_1d(y_in)
    out = y.copy()
    a, b = tf.inner.lo, tf.inner.hi
    primitive = _primitive_table()[0]
    up = y > b
    if np.any(up):
        u = np.minimum((y[up] - b) / tf.scale_hi, 1.0)
        out[up] = b + tf.scale_hi * primitive(u)
    down = y < a
    if np.any(down):
        u = np.minimum((a - y[down]) / tf.scale_lo, 1.0)
        out[down] = a - tf.scale_lo * primitive(u)
    out = np.clip(out, tf.sat_lo, tf.sat_hi)
    on_inner = (y >= a) & (y <= b)
    out[on_inner] = y[on_inner]
    return out.reshape(y_in.shape) if y_in.ndim else float(out[0])

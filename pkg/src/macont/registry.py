"""Named functions and ready-made experiment configs.

A registry function is a factory ``(n, m, box) -> ContinuousFunction``, or the
string ``"step"`` for the set-valued step, which has its own sequence and oracle.
"""

from __future__ import annotations

import copy

from .geometry import Box
from .smoothing import ContinuousFunction


class RegistryError(LookupError):
    pass


def _quadratic(n: int, m: int, box: Box) -> ContinuousFunction:
    # sum of squares over 2n maps [-1, 1]^n onto [0, 1/2]
    if m != 1:
        raise RegistryError("quadratic-fixed-point has a single output component")
    text = "(" + " + ".join(f"x{k}^2" for k in range(1, n + 1)) + f") / {2 * n}"
    return ContinuousFunction.from_expressions([text], box, "quadratic-fixed-point")


def _constant(value: float):
    def make(n: int, m: int, box: Box) -> ContinuousFunction:
        return ContinuousFunction.from_expressions([repr(value)] * m, box, f"constant {value!r}")
    return make


FUNCTIONS = {
    "quadratic-fixed-point": _quadratic,
    "constant-zero": _constant(0.0),
    "constant-one": _constant(1.0),
    "step": "step",
}


def lookup(name: str):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise RegistryError(f"unknown registry function {name!r}; known: {', '.join(sorted(FUNCTIONS))}") from None


def _square(n: int) -> list[list[float]]:
    return [[-1.0, 1.0] for _ in range(n)]


DEMOS = {
    "quadratic-joint": {
        "n": 2, "m": 1, "box": _square(2), "disk": {"center": [0.0, 0.0], "radius": 2.0},
        "registry": "quadratic-fixed-point",
        "slice": {"i": 1, "j": 1, "tix": [0.0, 0.5]},
        "schedule": {"k_max": 4},
        "tolerances": {"containment": 2e-2},
    },
    "fixed-point-1d": {
        "n": 1, "m": 1, "box": _square(1), "disk": {"center": [0.0], "radius": 1.5},
        "functions": ["0.25 + 0.2*sin(pi*x1)"],
        "slice": {"i": 1, "j": 1, "tix": [0.0, 0.5]},
        "schedule": {"k_max": 6},
        "tolerances": {"containment": 1e-2},
    },
    "cubic-joint": {
        "n": 3, "m": 1, "box": _square(3), "disk": {"center": [0.0, 0.0, 0.0], "radius": 2.0},
        "registry": "quadratic-fixed-point",
        "slice": {"i": 1, "j": 2, "tix": [0.0, 0.5]},
        "schedule": {"k_max": 2, "r0": 4},
        "tolerances": {"containment": 5e-2},
    },
    "step": {
        "n": 1, "m": 1, "box": _square(1), "disk": {"center": [0.0], "radius": 1.5},
        "registry": "step",
        "schedule": {"k_max": 8},
        "tolerances": {"containment": 5e-2},
    },
    "parabola": {
        "n": 1, "m": 1, "box": _square(1), "disk": {"center": [0.0], "radius": 1.5},
        "functions": ["x1^2"],
        "schedule": {"k_max": 6},
        "tolerances": {"containment": 1e-2},
    },
    "sine-product": {
        "n": 2, "m": 1, "box": _square(2), "disk": {"center": [0.0, 0.0], "radius": 2.0},
        "functions": ["sin(pi*x1)*x2"],
        "schedule": {"k_max": 4},
        "tolerances": {"containment": 2e-2},
    },
    "constant": {
        "n": 2, "m": 2, "box": _square(2), "disk": {"center": [0.0, 0.0], "radius": 2.0},
        "registry": "constant-one",
        "schedule": {"k_max": 3},
        "tolerances": {"containment": 1e-4},
    },
}


def demo_config(name: str) -> dict:
    try:
        return copy.deepcopy(DEMOS[name])
    except KeyError:
        raise RegistryError(f"unknown demo {name!r}; known: {', '.join(sorted(DEMOS))}") from None

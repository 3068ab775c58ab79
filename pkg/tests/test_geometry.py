import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macont.geometry import Box, Disk, Interval, cos_interval, exp_interval, sin_interval, sqrt_interval

finite = st.floats(-50, 50, allow_nan=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def test_interval_rejects_reversed_bounds():
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        Interval(math.nan, 0.0)


def test_interval_membership_and_strictness():
    outer = Interval(-1, 1)
    assert 0.3 in outer and 1.0 in outer and 1.5 not in outer
    assert Interval(0, 0.5) in outer
    assert Interval(0, 0.5).strictly_inside(outer)
    assert not Interval(-1, 0.5).strictly_inside(outer)


@settings(max_examples=200, deadline=None)
@given(intervals(), intervals(), st.floats(0, 1), st.floats(0, 1))
def test_arithmetic_encloses_pointwise_results(a, b, s, t):
    x = a.lo + s * (a.hi - a.lo)
    y = b.lo + t * (b.hi - b.lo)
    assert x + y in a + b
    assert x - y in a - b
    prod = a * b
    assert prod.lo - 1e-9 * (1 + abs(x * y)) <= x * y <= prod.hi + 1e-9 * (1 + abs(x * y))
    if not (b.lo <= 0 <= b.hi):
        q = a / b
        assert q.lo - 1e-9 * (1 + abs(x / y)) <= x / y <= q.hi + 1e-9 * (1 + abs(x / y))


@settings(max_examples=200, deadline=None)
@given(intervals(), st.floats(0, 1), st.integers(0, 5))
def test_integer_powers_enclose(a, s, p):
    x = a.lo + s * (a.hi - a.lo)
    enc = a ** p
    v = x ** p
    assert enc.lo - 1e-9 * (1 + abs(v)) <= v <= enc.hi + 1e-9 * (1 + abs(v))


@settings(max_examples=200, deadline=None)
@given(intervals(), st.floats(0, 1))
def test_elementary_functions_enclose(a, s):
    x = a.lo + s * (a.hi - a.lo)
    for fn, enc in ((math.sin, sin_interval), (math.cos, cos_interval)):
        e = enc(a)
        assert e.lo - 1e-12 <= fn(x) <= e.hi + 1e-12
    e = exp_interval(a)
    assert e.lo * (1 - 1e-12) <= math.exp(x) <= e.hi * (1 + 1e-12)
    if a.lo >= 0:
        e = sqrt_interval(a)
        assert e.lo - 1e-12 <= math.sqrt(x) <= e.hi + 1e-12


def test_even_power_straddling_zero():
    assert Interval(-2, 1) ** 2 == Interval(0, 4)


def test_box_remove_coord_and_indexing():
    box = Box.from_bounds([[-1, 1], [0, 2], [3, 4]])
    assert box[2] == Interval(0, 2)
    rest = box.remove_coord(2)
    assert rest.dim == 2 and rest[2] == Interval(3, 4)
    assert Box.cube(1).remove_coord(1) is None
    with pytest.raises(IndexError):
        box[0]


def test_box_contains_clamp_distance():
    box = Box.cube(2)
    X = np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]])
    assert box.contains(X).tolist() == [True, False, False]
    assert np.allclose(box.distance(X), [0.0, 1.0, math.sqrt(2)])
    assert box.contains([1.0, -1.0]) is True


def test_disk_contains_box_by_farthest_corner():
    box = Box.cube(2)
    assert Disk((0, 0), 2.0).contains_box(box)
    assert not Disk((0, 0), math.sqrt(2)).contains_box(box)
    assert Disk((0, 0), math.sqrt(2)).contains_box(box, strict=False)


def test_disk_slice():
    d = Disk((0.0, 0.0, 0.0), 2.0).slice(2, 1.0)
    assert d.center == (0.0, 0.0) and d.radius == pytest.approx(math.sqrt(3))
    with pytest.raises(ValueError):
        Disk((0.0, 0.0), 1.0).slice(1, 1.0)


def test_disk_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        Disk((0.0,), 0.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macont.geometry import Box, Interval
from macont.oracles import (ConstantOracle, DiagonalSliceOracle, EmptyOracle, FullOracle, FunctionGraphOracle,
                            PointSetOracle, StepOracle, graph_semidistance)
from macont.smoothing import ContinuousFunction

from reference import parabola_distance, polyline_distance, quadratic_slice_curve

PARABOLA = FunctionGraphOracle(ContinuousFunction.from_expressions(["x1^2"], Box.cube(1)))
QUAD = FunctionGraphOracle(ContinuousFunction.from_expressions(["(x1^2 + x2^2)/4"], Box.cube(2)))


def test_step_oracle_examples():
    step = StepOracle()
    assert graph_semidistance([[0.0, 0.3]], step) == 0.0
    assert graph_semidistance([[0.2, 0.0]], step) == pytest.approx(0.2, abs=1e-15)
    assert step.contains(0.0, -1.0) and step.contains(0.5, 1.0)
    assert not step.contains(0.5, -1.0)


def test_step_oracle_against_polyline():
    rng = np.random.default_rng(3)
    P = rng.uniform([-1.5, -2], [1.5, 2], size=(300, 2))
    V = np.array([[-1.0, -1.0], [0.0, -1.0], [0.0, 1.0], [1.0, 1.0]])
    ref = polyline_distance(P, V)
    got = StepOracle().graph_distances(P[:, :1], P[:, 1:])
    assert np.allclose(got, ref, atol=1e-12)


def test_empty_cloud_has_zero_semidistance():
    assert graph_semidistance(np.empty((0, 2)), StepOracle()) == 0.0


def test_dimension_mismatch_is_rejected():
    with pytest.raises(ValueError):
        graph_semidistance([[0.0, 0.0, 0.0]], StepOracle())


def test_parabola_cloud_uses_euclidean_distance():
    cloud = np.array([[0.5, 0.25], [0.5, 0.35]])
    d = graph_semidistance(cloud, PARABOLA)
    ref = parabola_distance(0.5, 0.35)
    assert d == pytest.approx(ref, abs=1e-9)
    assert d == pytest.approx(0.0689482, abs=1e-6)
    # the vertical gap is only an upper bound
    assert d < 0.1


def test_parabola_distance_against_brute_force():
    rng = np.random.default_rng(11)
    P = rng.uniform([-1.2, -0.5], [1.2, 1.5], size=(60, 2))
    got = PARABOLA.graph_distances(P[:, :1], P[:, 1:])
    ref = np.array([parabola_distance(x, y) for x, y in P])
    assert np.allclose(got, ref, atol=1e-9)


def test_full_and_empty_oracles():
    full = FullOracle(1, 1)
    assert graph_semidistance(np.random.default_rng(0).normal(size=(10, 2)), full) == 0.0
    empty = EmptyOracle(1, 1)
    assert empty.fibre(0.0).shape == (0, 1)
    assert empty.component_bound(1) is None
    assert math.isinf(empty.graph_distance(0.0, 0.0))


def test_constant_oracle_region():
    box = Box.cube(2)
    c = ConstantOracle([0.5], box, region=Box.from_bounds([[-1, 0], [-1, 1]]))
    assert c.contains([-0.5, 0.0], [0.5])
    assert not c.contains([0.5, 0.0], [0.5])
    assert c.graph_distance([0.5, 0.0], [0.5]) == pytest.approx(0.5)
    assert c.component_bound(1) == Interval(0.5, 0.5)


def test_point_set_oracle():
    ps = PointSetOracle([[0.1], [0.4]])
    assert ps.is_nonempty()
    assert ps.graph_distances(np.zeros((2, 0)), np.array([[0.2], [1.0]])).tolist() == pytest.approx([0.1, 0.6])
    assert ps.component_bound(1) == Interval(0.1, 0.4)
    assert not PointSetOracle(np.empty((0, 1))).is_nonempty()


def test_diagonal_slice_fibres_of_the_quadratic():
    G = DiagonalSliceOracle(QUAD, 1, 1)
    assert G.fibre([0.0])[:, 0] == pytest.approx([0.0], abs=1e-12)
    assert G.fibre([1.0])[:, 0] == pytest.approx([2 - math.sqrt(3)], abs=1e-10)


def test_diagonal_slice_distance_against_independent_curve():
    G = DiagonalSliceOracle(QUAD, 1, 1)
    curve = quadratic_slice_curve()
    rng = np.random.default_rng(5)
    P = np.column_stack([rng.uniform(-1, 1, 80), rng.uniform(-0.1, 0.5, 80)])
    ref = polyline_distance(P, curve)
    got = G.graph_distances(P[:, :1], P[:, 1:])
    assert np.allclose(got, ref, atol=1e-6)


def test_diagonal_slice_requires_function_parent():
    with pytest.raises(TypeError):
        DiagonalSliceOracle(StepOracle(), 1, 1)
    with pytest.raises(IndexError):
        DiagonalSliceOracle(QUAD, 2, 1)


def test_diagonal_slice_contains():
    G = DiagonalSliceOracle(QUAD, 1, 1)
    y = 2 - math.sqrt(3)
    assert G.contains([1.0], [y], tol=1e-9)
    assert not G.contains([1.0], [0.4], tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_contains_implies_zero_distance(x, s):
    step = StepOracle()
    y = s if x == 0 else math.copysign(1.0, x)
    assert step.contains(x, y)
    assert step.graph_distance(x, y) == 0.0
    fy = x * x
    assert PARABOLA.contains(x, fy)
    assert PARABOLA.graph_distance(x, fy) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.tuples(st.floats(-1.5, 1.5), st.floats(-2, 2)), st.tuples(st.floats(-1.5, 1.5), st.floats(-2, 2)))
def test_graph_distance_is_one_lipschitz(p, q):
    p, q = np.array(p), np.array(q)
    gap = float(np.linalg.norm(p - q))
    for oracle in (StepOracle(), PARABOLA):
        dp = oracle.graph_distance(p[:1], p[1:])
        dq = oracle.graph_distance(q[:1], q[1:])
        assert abs(dp - dq) <= gap + 1e-9


def test_function_graph_component_bound_encloses_samples():
    bound = QUAD.component_bound(1)
    vals = QUAD.f(Box.cube(2).grid(31))[:, 0]
    assert bound.lo <= vals.min() and vals.max() <= bound.hi

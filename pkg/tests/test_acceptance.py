"""Acceptance suite: one or more tests per criterion, each run at its stated tolerance.

A "[PASS]/[FAIL] criterion N" line per criterion is printed at the end of the
pytest run (see conftest.py).
"""

import hashlib
import subprocess
import sys
import time

import numpy as np
import pytest

from macont.bump import TransitionFunction, make_alpha, theta
from macont.expr import ExpressionError, evaluate, parse
from macont.geometry import Box, Disk, Interval
from macont.joint import JointSlicer
from macont.mesh import PLMap, SimplicialManifold, build_disk_mesh
from macont.pipeline import build_experiment, normalize_config, run_approx, run_joint
from macont.registry import demo_config
from macont.smoothing import ContinuousFunction, SmoothingSchedule, extend_to_disk, mollify
from macont.verify import check_boundary_sphere, nonincreasing_within, slice_violations

from reference import polyline_distance, quadratic_slice_curve

SAMPLES = 10_000
JOINT_DEMOS = ["quadratic-joint", "fixed-point-1d", "cubic-joint"]


def experiment(name, **overrides):
    cfg = demo_config(name)
    cfg["schedule"].update(overrides)
    return build_experiment(normalize_config(cfg))


# 1 -------------------------------------------------------------------------

@pytest.mark.criterion(1, "transition function: identity, containment, monotonicity")
def test_transition_function_contract():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    cases = [(Interval(-1, 1), Interval(0, 0.5)), (Interval(0, 4), Interval(1, 3)),
             (Interval(-1, 1), Interval(-0.9, 0.9))]
    for outer, inner in cases:
        tf = TransitionFunction(outer, inner)
        alpha = tf.alpha

        y = rng.uniform(inner.lo, inner.hi, SAMPLES)
        y[:2] = inner.lo, inner.hi
        assert np.max(np.abs(theta(tf, y) - y)) <= 1e-12

        y = rng.uniform(-50, 50, SAMPLES)
        eps = rng.uniform(-alpha, alpha, SAMPLES)
        eps[:2] = -alpha, alpha
        z = theta(tf, y) + eps
        assert np.all((z >= outer.lo) & (z <= outer.hi))

        a = rng.uniform(-10, 10, SAMPLES)
        b = rng.uniform(-10, 10, SAMPLES)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        assert np.all(theta(tf, lo) <= theta(tf, hi))
    assert time.perf_counter() - start < 5.0


# 2 -------------------------------------------------------------------------

@pytest.mark.criterion(2, "saturation margin formula")
def test_alpha_values():
    assert make_alpha(Interval(-1, 1), Interval(0, 0.5)) == 0.25
    assert make_alpha(Interval(0, 4), Interval(1, 3)) == 0.5


# 3 -------------------------------------------------------------------------

@pytest.mark.criterion(3, "smoothing convergence at k = 6")
@pytest.mark.parametrize("text,n", [("x1^2", 1), ("sin(pi*x1)*x2", 2)])
def test_smoothing_convergence(text, n):
    start = time.perf_counter()
    box = Box.cube(n)
    disk = Disk(tuple([0.0] * n), 1.5 if n == 1 else 2.0)
    f = ContinuousFunction.from_expressions([text], box)
    fext = extend_to_disk(f, box, disk)
    G = box.grid(401 if n == 1 else 81)
    exact = np.sin(np.pi * G[:, 0]) * G[:, 1] if n == 2 else G[:, 0] ** 2
    sched = SmoothingSchedule()
    errs = [float(np.max(np.abs(mollify(fext, sched.delta(k))(G)[:, 0] - exact))) for k in range(7)]
    assert errs[6] <= 1e-2
    assert nonincreasing_within(errs, 1.05)
    assert time.perf_counter() - start < 30.0


# 4 -------------------------------------------------------------------------

@pytest.mark.criterion(4, "quadratic joint demo: slice cloud converges to the fixed-point curve")
def test_quadratic_joint_against_bisection_curve():
    start = time.perf_counter()
    exp = experiment("quadratic-joint")
    assert exp.sched.resolution(4) == 2 ** 7
    cfg = exp.slice_config()
    slicer = JointSlicer(exp.sequence(), cfg)
    curve = quadratic_slice_curve(tol=1e-10)
    d = []
    for k in range(5):
        P = slicer.slice(k).gprime.values
        P = P[(P[:, 0] >= -1) & (P[:, 0] <= 1)]
        assert P.shape[0] > 0
        d.append(float(np.max(polyline_distance(P, curve))))
    assert d[4] <= 2e-2
    assert all(b < a for a, b in zip(d, d[1:])), d
    assert time.perf_counter() - start < 60.0


# 5 -------------------------------------------------------------------------

@pytest.mark.criterion(5, "structural slice invariants over the joint demos")
@pytest.mark.parametrize("name", JOINT_DEMOS)
def test_slice_invariants(name):
    exp = experiment(name)
    cfg = exp.slice_config()
    seq = exp.sequence()
    slicer = JointSlicer(seq, cfg)
    mags = []
    for k in range(exp.k_max + 1):
        res = slicer.slice(k)
        assert slice_violations(res, cfg, seq) == []
        assert abs(res.epsilon_used) < cfg.tf.alpha
        hv = res.h_values[res.M.vertices]
        assert np.min(np.abs(hv - res.epsilon_used)) >= cfg.delta_margin
        if res.N.n_simplices:
            assert res.N.simplices.shape[1] == exp.n
        mags.append(abs(res.epsilon_used))
    assert nonincreasing_within(mags, 1.05)
    assert mags[-1] < mags[0]


# 6 -------------------------------------------------------------------------

@pytest.mark.criterion(6, "boundary-sphere checks on meshes, slices and counterexamples")
def test_generated_meshes_pass_boundary_sphere():
    for n in (1, 2, 3):
        disk = Disk(tuple([0.0] * n), 2.0)
        for r in ((2, 8, 64) if n < 3 else (1, 2, 4)):
            M, emb = build_disk_mesh(n, disk, r)
            assert check_boundary_sphere(M, emb, disk)


@pytest.mark.criterion(6, "boundary-sphere checks on meshes, slices and counterexamples")
@pytest.mark.parametrize("name", ["quadratic-joint", "cubic-joint"])
def test_slices_pass_boundary_sphere(name):
    exp = experiment(name, k_max=2)
    result = run_joint(exp, with_clouds=False)
    assert result.report.flags["boundary_sphere"]


@pytest.mark.criterion(6, "boundary-sphere checks on meshes, slices and counterexamples")
def test_counterexamples_fail_boundary_sphere():
    disk = Disk((0.0, 0.0), 2.0)
    M, emb = build_disk_mesh(2, disk, 4)
    pulled = emb.values.copy()
    pulled[M.boundary_vertices[0]] *= 0.9
    assert not check_boundary_sphere(M, PLMap(M, pulled), disk)
    # removing the centre star leaves an annulus with two boundary cycles
    annulus = SimplicialManifold(2, M.simplices[~np.any(M.simplices == 0, axis=1)])
    assert not check_boundary_sphere(annulus, PLMap(annulus, emb.values), disk)


# 7 -------------------------------------------------------------------------

@pytest.mark.criterion(7, "one-dimensional demo crosses the level at every k")
def test_one_dimensional_crossings():
    exp = experiment("fixed-point-1d")
    cfg = exp.slice_config()
    slicer = JointSlicer(exp.sequence(), cfg)
    for k in range(exp.k_max + 1):
        res = slicer.slice(k)
        assert res.N.n_vertices >= 1
        M = res.M
        ends = res.h_values[M.boundary_vertices]
        # the endpoint values straddle every admissible level
        assert ends.min() <= -cfg.tf.alpha and ends.max() >= cfg.tf.alpha


# 8 -------------------------------------------------------------------------

@pytest.mark.criterion(8, "set-valued step demo at K = 8")
def test_step_demo():
    exp = experiment("step")
    assert exp.k_max == 8
    result = run_approx(exp, with_clouds=False)
    d = [result.report.rows[k].semidistance for k in range(9)]
    assert d[8] <= 0.05
    assert nonincreasing_within(d, 1.05)


# 9 -------------------------------------------------------------------------

@pytest.mark.criterion(9, "determinism of the quadratic joint demo")
def test_demo_is_byte_deterministic(tmp_path):
    digests = []
    for run in ("a", "b"):
        out = tmp_path / run
        subprocess.run([sys.executable, "-m", "macont.cli", "demo", "quadratic-joint", "--out", str(out), "--quiet"],
                       check=True, timeout=300)
        digests.append({p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(out.glob("*.csv"))})
    assert set(digests[0]) == {"clouds.csv", "report.csv"}
    assert digests[0] == digests[1]


# 10 ------------------------------------------------------------------------

PARSER_CORPUS = [
    ("2^3^2", 512.0), ("-2^2", -4.0), ("(-2)^2", 4.0), ("2^-1", 0.5), ("1 - 2 - 3", -4.0),
    ("8 / 4 / 2", 1.0), ("2 * 3 + 4", 10.0), ("2 + 3 * 4", 14.0), ("(2 + 3) * 4", 20.0), ("--3", 3.0),
    ("2 * -3", -6.0), ("3 - -2", 5.0), ("2^2*3", 12.0), ("2*3^2", 18.0), ("-x1^2", -9.0),
    ("x1 - x2 + 1", 2.0), ("x1 / x2 * 2", 3.0), ("sqrt(x1 + 1)^2", 4.0), ("cos(0) + 2^0", 2.0), ("1e2 / 10^2", 1.0),
]


@pytest.mark.criterion(10, "expression parser precedence and error positions")
def test_parser_corpus():
    assert len(PARSER_CORPUS) == 20
    x = np.array([3.0, 2.0])
    for text, expected in PARSER_CORPUS:
        assert evaluate(parse(text), x) == pytest.approx(expected, rel=1e-15), text


@pytest.mark.criterion(10, "expression parser precedence and error positions")
@pytest.mark.parametrize("text,position", [("1 +", 3), ("(1 + 2", 6), ("2 * * 3", 4), ("1 $ 2", 2), ("bogus(1)", 0)])
def test_parser_errors_carry_positions(text, position):
    with pytest.raises(ExpressionError) as info:
        parse(text)
    assert info.value.position == position

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macont import _kernels
from macont.geometry import Disk
from macont.joint import _local_edge_pairs
from macont.mesh import build_disk_mesh

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _local_nid(n, r, seed):
    M, emb = build_disk_mesh(n, Disk(tuple([0.0] * n), 1.0), r)
    rng = np.random.default_rng(seed)
    h = emb.values @ rng.normal(size=n) + 0.4 * rng.normal(size=emb.values.shape[0])
    above = h > 0.05
    pairs = _local_edge_pairs(n)
    la = np.stack([M.simplices[:, a] for a, _ in pairs], axis=1)
    lb = np.stack([M.simplices[:, b] for _, b in pairs], axis=1)
    cross = above[la] != above[lb]
    nid = np.full(la.shape, -1, dtype=np.int64)
    if cross.any():
        _, inv = np.unique(np.column_stack([la[cross], lb[cross]]), axis=0, return_inverse=True)
        nid[cross] = inv.ravel()
    return nid


@needs_numba
@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(1, 9), (2, 5), (3, 3)]), st.integers(0, 10 ** 6))
def test_slice_assembly_backends_agree(case, seed):
    n, r = case
    nid = _local_nid(n, r, seed)
    a = _kernels.slice_assembly_numpy(nid, n)
    b = _kernels.slice_assembly_numba(nid, n, _kernels.TET_DISJOINT_PAIRS)
    assert np.array_equal(a, b)


@needs_numba
@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_polyline_distance_backends_agree(seed, dim):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(200, dim))
    A = rng.normal(size=(50, dim))
    B = A + rng.normal(scale=0.3, size=(50, dim))
    B[0] = A[0]  # a degenerate segment
    a = _kernels.polyline_distance_numpy(P, A, B)
    b = _kernels.polyline_distance_numba(P, A, B)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_polyline_distance_simple_cases():
    A = np.array([[0.0, 0.0]])
    B = np.array([[1.0, 0.0]])
    P = np.array([[0.5, 2.0], [-3.0, 4.0], [2.0, 0.0]])
    assert _kernels.polyline_distance(P, A, B).tolist() == [2.0, 5.0, 1.0]
    assert np.all(np.isinf(_kernels.polyline_distance(P, np.empty((0, 2)), np.empty((0, 2)))))
    with pytest.raises(ValueError):
        _kernels.polyline_distance(P, np.zeros((1, 3)), np.zeros((1, 3)))


def test_slice_assembly_rejects_unknown_dimension():
    with pytest.raises(ValueError):
        _kernels.slice_assembly(np.zeros((1, 10), dtype=np.int64), 4)


def test_env_flag_selects_numpy_path():
    env = dict(os.environ, MACONT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from macont import _kernels; print(_kernels.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"

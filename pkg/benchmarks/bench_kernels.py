"""Compare the numba and pure-numpy kernels on inputs sized like a k = 4 run.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call (compilation) is timed separately and excluded from the
per-call figures.
"""

import argparse
import time

import numpy as np

from macont import _kernels
from macont.geometry import Disk
from macont.joint import _local_edge_pairs
from macont.mesh import build_disk_mesh


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def nid_table(n, r, seed=0):
    M, emb = build_disk_mesh(n, Disk(tuple([0.0] * n), 1.0), r)
    rng = np.random.default_rng(seed)
    h = emb.values @ rng.normal(size=n) + 0.05 * rng.normal(size=emb.values.shape[0])
    above = h > 0.01
    pairs = _local_edge_pairs(n)
    la = np.stack([M.simplices[:, a] for a, _ in pairs], axis=1)
    lb = np.stack([M.simplices[:, b] for _, b in pairs], axis=1)
    cross = above[la] != above[lb]
    nid = np.full(la.shape, -1, dtype=np.int64)
    _, inv = np.unique(np.column_stack([la[cross], lb[cross]]), axis=0, return_inverse=True)
    nid[cross] = inv.ravel()
    return nid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(1)
    P = rng.normal(size=(4000, 2))
    A = rng.normal(size=(1000, 2))
    B = A + 0.01 * rng.normal(size=(1000, 2))
    cases = [("polyline_distance 4000x1000", lambda: _kernels.polyline_distance_numpy(P, A, B),
              lambda: _kernels.polyline_distance_numba(P, A, B))]
    for n, r in ((2, 128), (3, 16)):
        nid = nid_table(n, r)
        cases.append((f"slice_assembly n={n} r={r} ({nid.shape[0]} simplices)",
                      lambda nid=nid, n=n: _kernels.slice_assembly_numpy(nid, n),
                      lambda nid=nid, n=n: _kernels.slice_assembly_numba(nid, n, _kernels.TET_DISJOINT_PAIRS)))

    print(f"{'kernel':<44}{'compile s':>11}{'numpy ms':>11}{'numba ms':>11}{'speedup':>9}")
    for label, np_fn, nb_fn in cases:
        t0 = time.perf_counter()
        nb_fn()
        compile_s = time.perf_counter() - t0
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{label:<44}{compile_s:>11.2f}{1e3 * t_np:>11.2f}{1e3 * t_nb:>11.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

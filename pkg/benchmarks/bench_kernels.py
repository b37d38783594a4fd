#!/usr/bin/env python3
"""Benchmark the compiled vs pure-numpy kernel backends.

The kernel module picks its backend at import time from the
PLACEPART_NO_NUMBA environment variable, so each backend runs in a fresh
subprocess. Output is a small table of per-call times for the three hot
kernels plus an end-to-end k-means run.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--dim D] [--k K]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, os, sys, timeit
import numpy as np
from placepart import _kernels
from placepart.core import FeatureMatrix
from placepart.partitioning import kmeans

n, d, k = (int(x) for x in sys.argv[1:4])
rng = np.random.default_rng(0)
points = np.ascontiguousarray(rng.normal(size=(n, d)))
centers = np.ascontiguousarray(rng.normal(size=(k, d)))
labels = rng.integers(0, k, n).astype(np.int64)

def best_of(fn, repeat=5, number=10):
    fn()  # warm-up (includes JIT compilation when numba is active)
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number

results = {
    "backend": _kernels.backend_name(),
    "pairwise_sq_dist": best_of(lambda: _kernels.pairwise_sq_dist(points, centers)),
    "assign_nearest": best_of(lambda: _kernels.assign_nearest(points, centers)),
    "update_centroids": best_of(lambda: _kernels.update_centroids(points, labels, k)),
    "kmeans_end_to_end": best_of(
        lambda: kmeans(FeatureMatrix(points), k, seed=1, n_restarts=3), repeat=3, number=1
    ),
}
print(json.dumps(results))
"""


def run_backend(no_numba: bool, n: int, d: int, k: int) -> dict:
    env = dict(os.environ, PLACEPART_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run(
        [sys.executable, "-c", WORKER, str(n), str(d), str(k)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=5000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--k", type=int, default=32)
    args = parser.parse_args()

    print(f"rows={args.rows} dim={args.dim} k={args.k}")
    numpy_res = run_backend(True, args.rows, args.dim, args.k)
    numba_res = run_backend(False, args.rows, args.dim, args.k)
    print(f"backends: {numpy_res['backend']} vs {numba_res['backend']}\n")

    kernels = ["pairwise_sq_dist", "assign_nearest", "update_centroids", "kmeans_end_to_end"]
    width = max(len(k) for k in kernels)
    print(f"{'kernel':<{width}}  {'numpy (ms)':>12}  {'numba (ms)':>12}  {'speedup':>8}")
    for kernel in kernels:
        a, b = numpy_res[kernel], numba_res[kernel]
        print(f"{kernel:<{width}}  {a * 1e3:>12.3f}  {b * 1e3:>12.3f}  {a / b:>7.2f}x")


if __name__ == "__main__":
    main()

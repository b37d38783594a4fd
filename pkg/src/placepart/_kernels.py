"""Hot numeric kernels for clustering and nearest-centroid classification.

Two interchangeable backends:

* numba ``@njit`` loops (default when numba imports cleanly), and
* a pure-numpy fallback, selected by setting ``PLACEPART_NO_NUMBA=1`` in the
  environment before import.

Both backends reduce in a fixed order, so each is individually
deterministic. ``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_NO_NUMBA = os.environ.get("PLACEPART_NO_NUMBA", "") not in ("", "0")

try:
    if _NO_NUMBA:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _pairwise_sq_dist_numpy(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def _assign_nearest_numpy(points: np.ndarray, centers: np.ndarray):
    d = _pairwise_sq_dist_numpy(points, centers)
    labels = d.argmin(axis=1).astype(np.int64)
    return labels, d[np.arange(points.shape[0]), labels]


def _update_centroids_numpy(points: np.ndarray, labels: np.ndarray, k: int):
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


if HAVE_NUMBA:

    @njit(cache=True)
    def _pairwise_sq_dist_numba(points, centers):
        n, dim = points.shape
        k = centers.shape[0]
        out = np.empty((n, k), dtype=np.float64)
        for i in range(n):
            for j in range(k):
                acc = 0.0
                for d in range(dim):
                    diff = points[i, d] - centers[j, d]
                    acc += diff * diff
                out[i, j] = acc
        return out

    @njit(cache=True)
    def _assign_nearest_numba(points, centers):
        n, dim = points.shape
        k = centers.shape[0]
        labels = np.empty(n, dtype=np.int64)
        best = np.empty(n, dtype=np.float64)
        for i in range(n):
            best_j = 0
            best_d = np.inf
            for j in range(k):
                acc = 0.0
                for d in range(dim):
                    diff = points[i, d] - centers[j, d]
                    acc += diff * diff
                if acc < best_d:
                    best_d = acc
                    best_j = j
            labels[i] = best_j
            best[i] = best_d
        return labels, best

    @njit(cache=True)
    def _update_centroids_numba(points, labels, k):
        n, dim = points.shape
        sums = np.zeros((k, dim), dtype=np.float64)
        counts = np.zeros(k, dtype=np.int64)
        for i in range(n):
            c = labels[i]
            counts[c] += 1
            for d in range(dim):
                sums[c, d] += points[i, d]
        return sums, counts


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def pairwise_sq_dist(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Full (n, k) matrix of squared Euclidean distances."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    if HAVE_NUMBA:
        return _pairwise_sq_dist_numba(points, centers)
    return _pairwise_sq_dist_numpy(points, centers)


def assign_nearest(points: np.ndarray, centers: np.ndarray):
    """Per-point nearest center: (labels, squared distance to that center).

    Ties go to the lower center index in both backends.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    if HAVE_NUMBA:
        return _assign_nearest_numba(points, centers)
    return _assign_nearest_numpy(points, centers)


def update_centroids(points: np.ndarray, labels: np.ndarray, k: int):
    """Per-cluster coordinate sums and member counts."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if HAVE_NUMBA:
        return _update_centroids_numba(points, labels, k)
    return _update_centroids_numpy(points, labels, k)

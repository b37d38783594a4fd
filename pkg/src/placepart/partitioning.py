"""The four workspace-partitioning strategies and the k-means they rely on.

Strategies: equal-duration time intervals, equal travel-distance intervals,
and two hybrids that first cluster appearance features with k-means and then
sub-partition each appearance cluster by the time or distance cue.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    FeatureMatrix,
    Partition,
    Trajectory,
    compact_labels,
    cumulative_travel_distance,
)


class Strategy(enum.Enum):
    TIME = "time"
    LOCATION = "location"
    TIME_APPEARANCE = "time-appearance"
    LOCATION_APPEARANCE = "location-appearance"

    @property
    def is_hybrid(self) -> bool:
        return self in (Strategy.TIME_APPEARANCE, Strategy.LOCATION_APPEARANCE)

    @property
    def base_cue(self) -> "Strategy":
        if self is Strategy.TIME_APPEARANCE:
            return Strategy.TIME
        if self is Strategy.LOCATION_APPEARANCE:
            return Strategy.LOCATION
        return self


@dataclass(frozen=True)
class PartitionConfig:
    strategy: Strategy
    n_classes_target: int
    k_appearance: int = 1
    seed: int = 0
    normalize_features: bool = False

    def __post_init__(self):
        if self.n_classes_target < 1:
            raise ValueError("n_classes_target must be >= 1")
        if self.strategy.is_hybrid and self.k_appearance < 1:
            raise ValueError("k_appearance must be >= 1 for hybrid strategies")


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    wcss: float
    iterations: int
    wcss_history: tuple[float, ...]

    @property
    def k_effective(self) -> int:
        return self.centroids.shape[0]


def _interval_bins(cue: np.ndarray, k: int) -> np.ndarray:
    """Equal-width binning of cue values into k intervals, dense-compacted.

    Bin of value v is min(floor((v - lo) / delta), k - 1) with
    delta = (hi - lo) / k; a constant cue collapses to a single bin.
    """
    cue = np.asarray(cue, dtype=np.float64)
    lo = cue.min()
    hi = cue.max()
    if hi == lo or k == 1:
        return np.zeros(len(cue), dtype=np.int64)
    delta = (hi - lo) / k
    bins = np.minimum(np.floor((cue - lo) / delta).astype(np.int64), k - 1)
    return compact_labels(bins)


def partition_by_time(traj: Trajectory, k: int) -> Partition:
    """Split the time span into k equal-duration intervals."""
    if len(traj) == 0:
        raise ValueError("cannot partition an empty trajectory")
    if k < 1:
        raise ValueError("class count must be >= 1")
    labels = _interval_bins(traj.timestamps(), k)
    return Partition(traj.sample_ids, labels)


def partition_by_location(traj: Trajectory, k: int) -> Partition:
    """Split cumulative travel distance into k equal-length intervals."""
    if len(traj) == 0:
        raise ValueError("cannot partition an empty trajectory")
    if k < 1:
        raise ValueError("class count must be >= 1")
    labels = _interval_bins(cumulative_travel_distance(traj), k)
    return Partition(traj.sample_ids, labels)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded k-means++: D^2 sampling after a uniform first pick."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    sq = _kernels.pairwise_sq_dist(points, centers[:1])[:, 0]
    for j in range(1, k):
        total = sq.sum()
        if total <= 0.0:
            # all remaining mass at existing centers; duplicate any point
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=sq / total))
        centers[j] = points[idx]
        sq = np.minimum(sq, _kernels.pairwise_sq_dist(points, centers[j : j + 1])[:, 0])
    return centers


def _hartigan_sweep(points: np.ndarray, labels: np.ndarray, counts: np.ndarray, centers: np.ndarray) -> bool:
    """One pass of single-point improving moves (Hartigan-style refinement).

    Moving point x from cluster a (size n_a) to b (size n_b) changes WCSS by
    n_b/(n_b+1) * d(x, c_b)^2 - n_a/(n_a-1) * d(x, c_a)^2; any strictly
    negative move is applied. This escapes assignment/update fixed points of
    Lloyd's algorithm that are not single-point-optimal. Moves out of
    singleton clusters are skipped so no cluster is ever emptied. counts,
    centers and labels are updated in place; returns True if anything moved.
    """
    moved = False
    sums = centers * counts[:, None]
    for i in range(len(points)):
        a = int(labels[i])
        if counts[a] <= 1:
            continue
        d = ((centers - points[i]) ** 2).sum(axis=1)
        gain = counts[a] / (counts[a] - 1.0) * d[a]
        cost = counts / (counts + 1.0) * d
        cost[a] = np.inf
        b = int(np.argmin(cost))
        # strict relative margin so float noise cannot cycle forever
        if cost[b] < gain * (1.0 - 1e-12):
            sums[a] -= points[i]
            counts[a] -= 1
            sums[b] += points[i]
            counts[b] += 1
            centers[a] = sums[a] / counts[a]
            centers[b] = sums[b] / counts[b]
            labels[i] = b
            moved = True
    return moved


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator, max_iter: int, tol: float):
    centers = _kmeans_pp_init(points, k, rng)
    history = []
    labels, sq = _kernels.assign_nearest(points, centers)
    iterations = 0
    while iterations < max_iter:
        # ---- Lloyd phase: alternate assign/update until relative tol ----
        prev_wcss = math.inf
        while iterations < max_iter:
            iterations += 1
            # repair empty clusters: re-seed at the point farthest from its
            # center and claim that point, so duplicates cannot ping-pong
            counts = np.bincount(labels, minlength=k)
            claimed = np.zeros(len(points), dtype=bool)
            while (counts == 0).any():
                empty = int(np.flatnonzero(counts == 0)[0])
                idx = int(np.argmax(np.where(claimed, -1.0, sq)))
                centers[empty] = points[idx]
                labels[idx] = empty
                sq[idx] = 0.0
                claimed[idx] = True
                counts = np.bincount(labels, minlength=k)
            wcss = float(sq.sum())
            if history and wcss > history[-1]:
                # the exact-arithmetic update step never increases WCSS, so a
                # rise here is float rounding; treat as converged, don't record
                break
            history.append(wcss)
            if math.isfinite(prev_wcss) and prev_wcss - wcss <= tol * prev_wcss:
                break
            prev_wcss = wcss
            sums, counts = _kernels.update_centroids(points, labels, k)
            centers = sums / counts[:, None]
            labels, sq = _kernels.assign_nearest(points, centers)
        # ---- refinement phase: single-point moves, then resume Lloyd ----
        sums, counts = _kernels.update_centroids(points, labels, k)
        counts = counts.astype(np.float64)
        centers = sums / counts[:, None]
        if not _hartigan_sweep(points, labels, counts, centers):
            break
        # resume Lloyd from the refined configuration; its next history entry
        # reflects the improvement, keeping the recorded WCSS non-increasing
        labels, sq = _kernels.assign_nearest(points, centers)
    return labels, iterations, history


def kmeans(
    features: FeatureMatrix,
    k: int,
    seed: int,
    max_iter: int = 100,
    tol: float = 1e-6,
    n_restarts: int = 1,
) -> KMeansResult:
    """Lloyd's algorithm from seeded k-means++ starts; deterministic per seed.

    Stops when the relative WCSS improvement drops below tol or max_iter is
    reached. Empty clusters are re-seeded, so the reported assignment is
    dense; k_effective may still fall below k when duplicates collapse.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > features.n_rows:
        raise ValueError(f"k={k} exceeds number of rows {features.n_rows}")
    if n_restarts < 1:
        raise ValueError("n_restarts must be >= 1")
    points = np.ascontiguousarray(features.values, dtype=np.float64)

    best = None
    for child_seed in np.random.SeedSequence(seed).spawn(n_restarts):
        rng = np.random.default_rng(child_seed)
        labels, iterations, history = _lloyd(points, k, rng, max_iter, tol)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, iterations, history)
    labels, iterations, history = best

    dense = compact_labels(labels)
    k_eff = int(dense.max()) + 1
    sums, counts = _kernels.update_centroids(points, dense, k_eff)
    centroids = sums / counts[:, None]
    _, sq = _kernels.assign_nearest(points, centroids)
    # wcss against the final per-class means, consistent with `centroids`
    wcss = float(((points - centroids[dense]) ** 2).sum())
    return KMeansResult(dense, centroids, wcss, iterations, tuple(history))


def partition_hybrid(traj: Trajectory, features: FeatureMatrix, cfg: PartitionConfig) -> Partition:
    """Appearance k-means, then per-cluster sub-partitioning by the base cue.

    Each appearance cluster with n_c members gets m_c = max(1, round(n_c / s))
    sub-classes, s = ceil(N / n_classes_target); the cue binning uses the
    cluster members' own value range. Final class ids enumerate the
    (cluster, sub-class) pairs densely, so the total count can drift from
    the target.
    """
    if not cfg.strategy.is_hybrid:
        raise ValueError(f"{cfg.strategy.value} is not a hybrid strategy")
    n = len(traj)
    if features.n_rows != n:
        raise ValueError(f"feature rows ({features.n_rows}) != trajectory length ({n})")

    values = features.values
    if cfg.normalize_features:
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        values = np.where(norms > 0, values / np.maximum(norms, 1e-30), values)
        values = FeatureMatrix(values).values

    clusters = kmeans(FeatureMatrix(values), cfg.k_appearance, cfg.seed)
    cue = (
        traj.timestamps()
        if cfg.strategy.base_cue is Strategy.TIME
        else cumulative_travel_distance(traj)
    )

    sub_size = math.ceil(n / cfg.n_classes_target)
    labels = np.empty(n, dtype=np.int64)
    next_class = 0
    for c in range(clusters.k_effective):
        members = np.flatnonzero(clusters.assignments == c)
        m_c = max(1, int(math.floor(len(members) / sub_size + 0.5)))
        sub = _interval_bins(cue[members], m_c)
        labels[members] = next_class + sub
        next_class += int(sub.max()) + 1
    return Partition(traj.sample_ids, compact_labels(labels))


def run_strategy(
    traj: Trajectory, cfg: PartitionConfig, features: FeatureMatrix | None = None
) -> Partition:
    """Dispatch a PartitionConfig to the matching strategy."""
    if cfg.strategy is Strategy.TIME:
        return partition_by_time(traj, cfg.n_classes_target)
    if cfg.strategy is Strategy.LOCATION:
        return partition_by_location(traj, cfg.n_classes_target)
    if features is None:
        raise ValueError(f"strategy {cfg.strategy.value} requires appearance features")
    return partition_hybrid(traj, features, cfg)

"""Domain types and geometric/temporal primitives shared by the whole pipeline.

Everything here is immutable after construction and all operations are pure,
so concurrent reads and data-parallel mapping are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_heading(heading: float) -> float:
    """Wrap an angle in radians into [-pi, pi)."""
    return (heading + math.pi) % TWO_PI - math.pi


def angular_difference(a: float, b: float) -> float:
    """Smallest absolute angle between two headings, in [0, pi].

    Wrap-around correct: angular_difference(0, 2*pi - eps) == eps.
    Reduces |a - b| so the result is exactly symmetric in its arguments.
    """
    d = abs(a - b) % TWO_PI
    return TWO_PI - d if d > math.pi else d


@dataclass(frozen=True)
class Pose:
    """Planar pose in a local metric frame; heading in radians, CCW positive."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError("pose coordinates must be finite")
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class TrajectorySample:
    sample_id: int
    timestamp: float
    pose: Pose

    def __post_init__(self):
        if self.sample_id < 0:
            raise ValueError(f"sample_id must be non-negative, got {self.sample_id}")


@dataclass(frozen=True)
class Trajectory:
    """Ordered sequence of timestamped poses collected by the mapper robot.

    Samples are ordered by timestamp (ties broken by sample_id); sample ids
    are unique. Loaders sort before construction; construction validates.
    """

    samples: tuple[TrajectorySample, ...]
    frame_note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample_id in trajectory")
        for prev, cur in zip(self.samples, self.samples[1:]):
            if cur.timestamp < prev.timestamp:
                raise ValueError("trajectory samples not sorted by timestamp")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def sample_ids(self) -> tuple[int, ...]:
        return tuple(s.sample_id for s in self.samples)

    def timestamps(self) -> np.ndarray:
        return np.array([s.timestamp for s in self.samples], dtype=np.float64)

    def positions(self) -> np.ndarray:
        """(N, 2) array of x, y."""
        return np.array([(s.pose.x, s.pose.y) for s in self.samples], dtype=np.float64)

    def headings(self) -> np.ndarray:
        return np.array([s.pose.heading for s in self.samples], dtype=np.float64)

    @staticmethod
    def from_arrays(sample_ids, timestamps, xs, ys, headings, frame_note: str = "") -> "Trajectory":
        samples = [
            TrajectorySample(int(i), float(t), Pose(float(x), float(y), float(h)))
            for i, t, x, y, h in zip(sample_ids, timestamps, xs, ys, headings)
        ]
        samples.sort(key=lambda s: (s.timestamp, s.sample_id))
        return Trajectory(tuple(samples), frame_note)


def cumulative_travel_distance(traj: Trajectory) -> np.ndarray:
    """Cumulative Euclidean distance along the trajectory; element 0 is 0."""
    if len(traj) == 0:
        raise ValueError("cumulative_travel_distance on empty trajectory")
    pos = traj.positions()
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    out = np.empty(len(traj), dtype=np.float64)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


@dataclass(frozen=True)
class FeatureMatrix:
    """N x D appearance descriptors, one row per trajectory sample (positional)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {values.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"feature matrix must be at least 1x1, got shape {values.shape}")
        if not np.issubdtype(values.dtype, np.floating):
            values = values.astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise ValueError("feature matrix contains non-finite values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Partition:
    """Assignment of every trajectory sample to a dense 0-based place-class id.

    sample_ids and labels are positionally aligned (trajectory order).
    Density invariant: every id in [0, n_classes) has at least one member.
    """

    sample_ids: tuple[int, ...]
    labels: np.ndarray
    n_classes: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "sample_ids", tuple(int(i) for i in self.sample_ids))
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.shape != (len(self.sample_ids),):
            raise ValueError("labels must align one-to-one with sample_ids")
        if len(self.sample_ids) == 0:
            raise ValueError("partition must cover at least one sample")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("duplicate sample_id in partition")
        n_classes = int(labels.max()) + 1
        present = np.unique(labels)
        if labels.min() < 0 or len(present) != n_classes:
            raise ValueError("class ids must be dense 0-based")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def class_of(self) -> dict[int, int]:
        return {sid: int(c) for sid, c in zip(self.sample_ids, self.labels)}

    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def compact_labels(raw_labels: np.ndarray) -> np.ndarray:
    """Re-map arbitrary integer labels to dense 0-based ids, preserving order."""
    _, dense = np.unique(np.asarray(raw_labels, dtype=np.int64), return_inverse=True)
    return dense.astype(np.int64)

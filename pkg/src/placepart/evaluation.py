"""Ground-truth labeling, nearest-centroid proxy classifier, SR and NSR.

A test sample inherits the place class of the nearest training sample among
those within the orientation threshold, provided that distance stays within
the distance threshold; otherwise it is invalid and excluded from metrics.

The classifier is a nearest-centroid model over the same feature space used
for partitioning, standing in for a fine-tuned DCNN at desk scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import FeatureMatrix, Partition, Trajectory, angular_difference


@dataclass(frozen=True)
class GroundTruthLabel:
    test_sample_id: int
    label: int | None  # None means invalid (no admissible training match)
    matched_train_id: int | None = None
    match_distance: float | None = None

    @property
    def valid(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class TopXPrediction:
    test_sample_id: int
    ranked_classes: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.ranked_classes)) != len(self.ranked_classes):
            raise ValueError("ranked_classes contains duplicates")


@dataclass(frozen=True)
class CentroidModel:
    """Per-class training-feature mean and member count."""

    centroids: np.ndarray  # (n_classes, D)
    class_counts: np.ndarray  # (n_classes,)

    @property
    def n_classes(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class EvaluationReport:
    n_valid_tests: int
    n_invalid_tests: int
    sr_top1: float
    sr_topx: float
    nsr_top1: float
    top_x: int
    n_classes: int
    class_size_histogram: tuple[tuple[int, int], ...]  # (class size, #classes) pairs
    mean_class_size: float


def assign_ground_truth(
    test: Trajectory,
    train: Trajectory,
    train_partition: Partition,
    orient_thresh_deg: float = 20.0,
    dist_thresh_m: float = 18.0,
) -> list[GroundTruthLabel]:
    """Label each test sample via the two-stage orientation/distance rule."""
    if len(train) == 0:
        raise ValueError("empty training trajectory")
    class_of = train_partition.class_of
    missing = [s.sample_id for s in train.samples if s.sample_id not in class_of]
    if missing:
        raise ValueError(f"train partition does not cover sample ids {missing[:5]}")

    orient_thresh = math.radians(orient_thresh_deg)
    train_pos = train.positions()
    train_head = train.headings()
    train_ids = np.array(train.sample_ids, dtype=np.int64)

    out: list[GroundTruthLabel] = []
    for s in test.samples:
        head_diff = np.abs(
            (train_head - s.pose.heading + math.pi) % (2.0 * math.pi) - math.pi
        )
        candidates = np.flatnonzero(head_diff <= orient_thresh)
        if len(candidates) == 0:
            out.append(GroundTruthLabel(s.sample_id, None))
            continue
        d = np.hypot(
            train_pos[candidates, 0] - s.pose.x, train_pos[candidates, 1] - s.pose.y
        )
        best_d = d.min()
        if best_d > dist_thresh_m:
            out.append(GroundTruthLabel(s.sample_id, None))
            continue
        # nearest candidate; equidistant ties go to the lower sample_id
        tied = candidates[d == best_d]
        match = int(train_ids[tied].min())
        out.append(GroundTruthLabel(s.sample_id, class_of[match], match, float(best_d)))
    return out


def train_centroid_model(
    train_features: FeatureMatrix, train_partition: Partition
) -> CentroidModel:
    """Class centroids as arithmetic means of member feature rows.

    Feature rows align positionally with the partition's sample order.
    """
    if train_features.n_rows != len(train_partition.sample_ids):
        raise ValueError(
            f"feature rows ({train_features.n_rows}) != partition size "
            f"({len(train_partition.sample_ids)})"
        )
    labels = train_partition.labels
    k = train_partition.n_classes
    sums, counts = _kernels.update_centroids(train_features.values, labels, k)
    return CentroidModel(sums / counts[:, None], counts)


def classify_top_x(model: CentroidModel, feature: np.ndarray, x: int) -> TopXPrediction:
    """Rank classes by centroid distance; ties go to the lower class id."""
    return classify_batch_top_x(model, np.asarray(feature)[None, :], x, [0])[0]


def classify_batch_top_x(
    model: CentroidModel, features: np.ndarray, x: int, sample_ids
) -> list[TopXPrediction]:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise ValueError(
            f"feature dimension {features.shape[-1]} != model dimension {model.dim}"
        )
    if x < 1:
        raise ValueError("x must be >= 1")
    depth = min(x, model.n_classes)
    dist = _kernels.pairwise_sq_dist(features, model.centroids)
    # stable sort: equal distances resolve to the lower class id
    order = np.argsort(dist, axis=1, kind="stable")[:, :depth]
    return [
        TopXPrediction(int(sid), tuple(int(c) for c in row))
        for sid, row in zip(sample_ids, order)
    ]


def _aligned_valid_pairs(preds, gts):
    if len(preds) != len(gts):
        raise ValueError("prediction/ground-truth length mismatch")
    pairs = []
    for p, g in zip(preds, gts):
        if p.test_sample_id != g.test_sample_id:
            raise ValueError(
                f"misaligned ids: prediction {p.test_sample_id} vs "
                f"ground truth {g.test_sample_id}"
            )
        if g.valid:
            pairs.append((p, g))
    return pairs


def success_rate(preds: list[TopXPrediction], gts: list[GroundTruthLabel]) -> float:
    """Fraction of valid test samples whose true class appears in the rank list."""
    pairs = _aligned_valid_pairs(preds, gts)
    if not pairs:
        warnings.warn("success_rate over zero valid test samples", stacklevel=2)
        return 0.0
    hits = sum(1 for p, g in pairs if g.label in p.ranked_classes)
    return hits / len(pairs)


def normalized_success_rate(
    preds: list[TopXPrediction],
    gts: list[GroundTruthLabel],
    model: CentroidModel,
) -> float:
    """Top-1 success rate with each hit down-weighted by the predicted class size."""
    if any(len(p.ranked_classes) > 1 for p in preds):
        raise ValueError("normalized success rate is defined for top-1 predictions only")
    pairs = _aligned_valid_pairs(preds, gts)
    if not pairs:
        warnings.warn("normalized_success_rate over zero valid test samples", stacklevel=2)
        return 0.0
    total = 0.0
    for p, g in pairs:
        if g.label in p.ranked_classes:
            count = int(model.class_counts[p.ranked_classes[0]])
            if count == 0:
                raise ValueError(f"class {p.ranked_classes[0]} has zero recorded count")
            total += 1.0 / count
    return total / len(pairs)


def evaluate(
    train: Trajectory,
    train_features: FeatureMatrix,
    train_partition: Partition,
    test: Trajectory,
    test_features: FeatureMatrix,
    orient_thresh_deg: float = 20.0,
    dist_thresh_m: float = 18.0,
    top_x: int = 5,
) -> EvaluationReport:
    """End-to-end evaluation of one partition: ground truth, model, SR/NSR."""
    if test_features.n_rows != len(test):
        raise ValueError("test feature rows != test trajectory length")
    gts = assign_ground_truth(test, train, train_partition, orient_thresh_deg, dist_thresh_m)
    model = train_centroid_model(train_features, train_partition)

    depth = max(top_x, 1)
    ranked = classify_batch_top_x(model, test_features.values, depth, test.sample_ids)
    top1 = [TopXPrediction(p.test_sample_id, p.ranked_classes[:1]) for p in ranked]

    n_valid = sum(1 for g in gts if g.valid)
    with warnings.catch_warnings():
        if n_valid == 0:
            warnings.simplefilter("ignore")
        sr1 = success_rate(top1, gts)
        srx = success_rate(ranked, gts)
        nsr1 = normalized_success_rate(top1, gts, model)

    sizes = train_partition.class_sizes()
    hist_sizes, hist_counts = np.unique(sizes, return_counts=True)
    return EvaluationReport(
        n_valid_tests=n_valid,
        n_invalid_tests=len(gts) - n_valid,
        sr_top1=sr1,
        sr_topx=srx,
        nsr_top1=nsr1,
        top_x=top_x,
        n_classes=train_partition.n_classes,
        class_size_histogram=tuple(
            (int(s), int(c)) for s, c in zip(hist_sizes, hist_counts)
        ),
        mean_class_size=float(sizes.mean()),
    )

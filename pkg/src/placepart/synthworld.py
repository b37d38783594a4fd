"""Seeded synthetic worlds: a closed campus-style loop with place-correlated
appearance features, small enough to run on a desk.

The loop is a circle split into equal arcs, one place per arc. Each place
owns a random feature prototype; every sample's descriptor is that
prototype plus isotropic Gaussian noise. The test lap revisits the same
stations with bounded pose jitter, so every test sample has a valid
ground-truth match under the default thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FeatureMatrix, Trajectory

DEFAULT_RADIUS_M = 100.0
POSE_JITTER_M = 2.0
HEADING_JITTER_DEG = 10.0


@dataclass(frozen=True)
class ConstantSpeed:
    pass


@dataclass(frozen=True)
class VariableSpeed:
    min_speed: float
    max_speed: float

    def __post_init__(self):
        if not (0 < self.min_speed <= self.max_speed):
            raise ValueError("need 0 < min_speed <= max_speed")


SpeedProfile = ConstantSpeed | VariableSpeed


@dataclass(frozen=True)
class WorldSpec:
    n_places: int
    n_samples: int
    feature_dim: int
    speed_profile: SpeedProfile = ConstantSpeed()
    feature_noise_sigma: float = 0.1
    revisit: bool = False
    seed: int = 0
    radius_m: float = DEFAULT_RADIUS_M
    # amplitude of a smooth appearance drift along the loop; 0 keeps features
    # constant within a place
    appearance_gain: float = 0.0

    def __post_init__(self):
        if self.n_places < 1:
            raise ValueError("n_places must be >= 1")
        if self.n_samples < self.n_places:
            raise ValueError("n_samples must be >= n_places")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be >= 1")
        if self.feature_noise_sigma < 0:
            raise ValueError("feature_noise_sigma must be >= 0")
        if self.radius_m <= 0:
            raise ValueError("radius_m must be > 0")
        if self.appearance_gain < 0:
            raise ValueError("appearance_gain must be >= 0")


@dataclass(frozen=True)
class World:
    train: Trajectory
    train_features: FeatureMatrix
    test: Trajectory
    test_features: FeatureMatrix
    true_place_of: dict[int, int]  # sample_id -> place, shared loop stations


def _arc_positions(spec: WorldSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """(timestamps, arc lengths); arc is scaled so the loop closes exactly."""
    n = spec.n_samples
    timestamps = np.arange(n, dtype=np.float64)
    if isinstance(spec.speed_profile, ConstantSpeed):
        steps = np.ones(n - 1)
    else:
        # slowly varying speed: interpolate between random knots so whole
        # stretches of the run are fast or slow, like a real robot
        n_knots = max(2, min(12, n // 16))
        knots = rng.uniform(spec.speed_profile.min_speed, spec.speed_profile.max_speed, n_knots)
        steps = np.interp(
            np.linspace(0.0, n_knots - 1.0, n - 1), np.arange(n_knots), knots
        )
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    laps = 2 if spec.revisit else 1
    total = laps * 2.0 * math.pi * spec.radius_m
    if arc[-1] > 0:
        # leave a one-step gap so the last sample does not land on the first
        arc = arc * (total * (n - 1) / n / arc[-1])
    return timestamps, arc


def _matched_station(
    test_x, test_y, test_h, train_x, train_y, train_h, orient_thresh_rad: float
) -> np.ndarray:
    """For each test pose, the nearest orientation-compatible train station."""
    out = np.empty(len(test_x), dtype=np.int64)
    for i in range(len(test_x)):
        diff = np.abs((train_h - test_h[i] + math.pi) % (2.0 * math.pi) - math.pi)
        ok = np.flatnonzero(diff <= orient_thresh_rad)
        d = np.hypot(train_x[ok] - test_x[i], train_y[ok] - test_y[i])
        out[i] = ok[int(np.argmin(d))]
    return out


def generate_world(spec: WorldSpec) -> World:
    """Deterministic train/test session pair over the same loop."""
    rng = np.random.default_rng(spec.seed)
    timestamps, arc = _arc_positions(spec, rng)

    circumference = 2.0 * math.pi * spec.radius_m
    theta = arc / spec.radius_m
    xs = spec.radius_m * np.cos(theta)
    ys = spec.radius_m * np.sin(theta)
    headings = theta + math.pi / 2.0  # tangent, CCW travel

    # place regions start at a random phase, so no partitioning strategy gets
    # boundary alignment for free
    phase = rng.uniform()
    frac = (arc / circumference + phase) % 1.0
    places = np.minimum((frac * spec.n_places).astype(np.int64), spec.n_places - 1)

    prototypes = rng.normal(size=(spec.n_places, spec.feature_dim))
    # smooth periodic appearance drift along the loop (two harmonics per dim)
    drift_coef = rng.normal(size=(2, spec.feature_dim))
    drift_phase = rng.uniform(0.0, 2.0 * math.pi, size=(2, spec.feature_dim))

    def drift(arc_pos: np.ndarray) -> np.ndarray:
        if spec.appearance_gain == 0.0:
            return np.zeros((len(arc_pos), spec.feature_dim))
        ang = (2.0 * math.pi * arc_pos / circumference)[:, None]
        return spec.appearance_gain * (
            drift_coef[0] * np.cos(ang + drift_phase[0])
            + drift_coef[1] * np.cos(2.0 * ang + drift_phase[1])
        )

    ids = np.arange(spec.n_samples)
    base_feats = prototypes[places] + drift(arc)

    train = Trajectory.from_arrays(ids, timestamps, xs, ys, headings, frame_note="synthworld train")
    train_feats = base_feats + spec.feature_noise_sigma * rng.normal(
        size=(spec.n_samples, spec.feature_dim)
    )

    # test lap: same stations, bounded pose jitter, fresh feature noise
    jitter_r = rng.uniform(0.0, POSE_JITTER_M, spec.n_samples)
    jitter_a = rng.uniform(0.0, 2.0 * math.pi, spec.n_samples)
    test_x = xs + jitter_r * np.cos(jitter_a)
    test_y = ys + jitter_r * np.sin(jitter_a)
    test_h = headings + rng.uniform(
        -math.radians(HEADING_JITTER_DEG), math.radians(HEADING_JITTER_DEG), spec.n_samples
    )
    test = Trajectory.from_arrays(ids, timestamps, test_x, test_y, test_h, frame_note="synthworld test")
    # a test image depicts the place of the station it will be matched to, so
    # a zero-noise world is perfectly classifiable under the true-place partition
    matched = _matched_station(test_x, test_y, test_h, xs, ys, headings, math.radians(20.0))
    test_feats = base_feats[matched] + spec.feature_noise_sigma * rng.normal(
        size=(spec.n_samples, spec.feature_dim)
    )

    return World(
        train=train,
        train_features=FeatureMatrix(train_feats),
        test=test,
        test_features=FeatureMatrix(test_feats),
        true_place_of={int(i): int(p) for i, p in zip(ids, places)},
    )

"""Workspace partitioning and retrieval-style evaluation for visual place
classification."""

from .core import (
    FeatureMatrix,
    Partition,
    Pose,
    Trajectory,
    TrajectorySample,
    angular_difference,
    cumulative_travel_distance,
)
from .evaluation import (
    CentroidModel,
    EvaluationReport,
    GroundTruthLabel,
    TopXPrediction,
    assign_ground_truth,
    classify_top_x,
    evaluate,
    normalized_success_rate,
    success_rate,
    train_centroid_model,
)
from .partitioning import (
    KMeansResult,
    PartitionConfig,
    Strategy,
    kmeans,
    partition_by_location,
    partition_by_time,
    partition_hybrid,
    run_strategy,
)
from .synthworld import ConstantSpeed, VariableSpeed, World, WorldSpec, generate_world

__version__ = "0.1.0"

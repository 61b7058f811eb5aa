"""Fuzzy inference systems generated by fuzzy c-means, plus sampling and rule-set-size experiments."""

from .dataio import Dataset, SyntheticSpec, generate_synthetic, load_dataset
from .experiment import ExperimentConfig, run_experiment
from .fcm import FCMConfig, FCMResult, fcm_cluster
from .inference import FISModel, Prediction, predict, predict_set
from .membership import Partition, TriangularMF, build_partition
from .rulegen import Rule, RuleSet, extract_rules, normalize_weights

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "ExperimentConfig",
    "FCMConfig",
    "FCMResult",
    "FISModel",
    "Partition",
    "Prediction",
    "Rule",
    "RuleSet",
    "SyntheticSpec",
    "TriangularMF",
    "build_partition",
    "extract_rules",
    "fcm_cluster",
    "generate_synthetic",
    "load_dataset",
    "normalize_weights",
    "predict",
    "predict_set",
    "run_experiment",
]

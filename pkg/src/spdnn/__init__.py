"""Sparse-penalized deep neural network estimators for weakly dependent time series."""

from .dgp import DgpKind, Trajectory, bayes_classifier, mean_function, simulate, simulate_exog_ar1
from .harness import (
    ExperimentResult,
    GridSpec,
    evaluate_excess_risk,
    evaluate_l2,
    grid_search,
    replicate,
)
from .net import Architecture, Network, forward, loss_and_gradient
from .optim import AdamState, TrainConfig, TrainingHistory, adam_step, train
from .penalty import PenaltyParams, clipped_norm, l0_norm, penalty_subgradient, penalty_value
from .report import report

__all__ = [
    "AdamState", "Architecture", "DgpKind", "ExperimentResult", "GridSpec", "Network",
    "PenaltyParams", "TrainConfig", "TrainingHistory", "Trajectory", "adam_step",
    "bayes_classifier", "clipped_norm", "evaluate_excess_risk", "evaluate_l2", "forward",
    "grid_search", "l0_norm", "loss_and_gradient", "mean_function", "penalty_subgradient",
    "penalty_value", "replicate", "report", "simulate", "simulate_exog_ar1", "train",
]

"""Worst-case solvers, predictors and the prescriptor."""
from .continuous import ar_ball_interval, ar_ball_worst_case, ellipsoid_linear_worst_case
from .entropy import entropy_dro_dual, entropy_dual_batch, entropy_primal_oracle
from .markov import markov_ball_worst_case
from .polytope import moment_set_worst_case, wasserstein_batch, wasserstein_set_worst_case
from .predictor import predictor, predictor_values_batch, prescriptor
from .types import AmbiguitySpec, Branch, CostFunctionTable, LossTable, PredictorOutput, SpecKind

__all__ = [
    "AmbiguitySpec",
    "Branch",
    "CostFunctionTable",
    "LossTable",
    "PredictorOutput",
    "SpecKind",
    "ar_ball_interval",
    "ar_ball_worst_case",
    "ellipsoid_linear_worst_case",
    "entropy_dro_dual",
    "entropy_dual_batch",
    "entropy_primal_oracle",
    "markov_ball_worst_case",
    "moment_set_worst_case",
    "predictor",
    "predictor_values_batch",
    "prescriptor",
    "wasserstein_batch",
    "wasserstein_set_worst_case",
]

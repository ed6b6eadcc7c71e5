"""Rate-optimal distributionally robust prediction and prescription.

Submodules: ``processes`` (data-generating models and simulation),
``statistics`` (sufficient statistics), ``rates`` (rate functions),
``dro`` (worst-case solvers, predictors, prescriptor) and ``harness``
(Monte-Carlo disappointment experiments).
"""
from .dro import AmbiguitySpec, CostFunctionTable, LossTable, SpecKind, predictor, prescriptor
from .errors import (
    DataError,
    DegenerateDataError,
    DomainError,
    InfeasibleError,
    InsufficientDataError,
    ParameterDomainError,
    RateDroError,
    StabilityError,
    UnboundedError,
    UsageError,
)
from .harness import ExperimentConfig, estimate_decay_rate, frontier, newsvendor_scenario, run_curve, sanov_check, write_csv
from .processes import FiniteIidModel, MarkovDoubletModel, ParametricIidModel, ScalarArModel, VarDriftModel, simulate
from .rates import RateKind, RateSpec
from .statistics import StatisticKind

__version__ = "0.1.0"

"""Summary statistics of observed trajectories and their large-sample limits."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError, DegenerateDataError, UsageError
from .processes import (
    Family,
    FiniteIidModel,
    MarkovDoubletModel,
    ParametricIidModel,
    ScalarArModel,
    Trajectory,
    VarDriftModel,
)


class StatisticKind(str, enum.Enum):
    EMPIRICAL_DIST = "empirical_dist"
    DOUBLET_DIST = "doublet_dist"
    SCALED_SAMPLE_MEAN = "scaled_sample_mean"
    SAMPLE_MEAN = "sample_mean"
    LEAST_SQUARES_COEFF = "least_squares_coeff"
    YULE_WALKER_COEFF = "yule_walker_coeff"


@dataclass(frozen=True)
class StatisticValue:
    kind: StatisticKind
    value: Union[np.ndarray, float]
    sample_size: int


def _states(traj: Trajectory, n: int) -> np.ndarray:
    v = np.asarray(traj.values)
    if v.ndim != 1 or not np.issubdtype(v.dtype, np.integer):
        raise DataError("expected a trajectory of integer states")
    if v.min() < 1 or v.max() > n:
        raise DataError(f"state out of range 1..{n}")
    return v - 1


def empirical_distribution(traj: Trajectory, d: int) -> StatisticValue:
    """Relative frequency of each state ``1..d``."""
    x = _states(traj, d)
    counts = np.bincount(x, minlength=d)
    return StatisticValue(StatisticKind.EMPIRICAL_DIST, counts / x.size, x.size)


def doublet_distribution(traj: Trajectory, m: int) -> StatisticValue:
    """Relative frequency of each transition ``(i, j)``, counting ``xi_0 -> xi_1``."""
    if traj.prepended_state is None:
        raise DataError("doublet statistic needs the initial state xi_0")
    x = _states(traj, m)
    if not 1 <= traj.prepended_state <= m:
        raise DataError(f"initial state out of range 1..{m}")
    prev = np.concatenate(([traj.prepended_state - 1], x[:-1]))
    counts = np.bincount(prev * m + x, minlength=m * m).reshape(m, m)
    return StatisticValue(StatisticKind.DOUBLET_DIST, counts / x.size, x.size)


def scaled_sample_mean(traj: Trajectory, A) -> StatisticValue:
    """``(I - A)`` times the sample mean; estimates the VAR drift."""
    v = np.asarray(traj.values, float)
    A = np.atleast_2d(np.asarray(A, float))
    d = A.shape[0]
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] != d or A.shape != (d, d):
        raise DataError("trajectory dimension does not match A")
    val = (np.eye(d) - A) @ v.mean(axis=0)
    return StatisticValue(StatisticKind.SCALED_SAMPLE_MEAN, val, v.shape[0])


def sample_mean(traj: Trajectory) -> StatisticValue:
    v = np.asarray(traj.values, float)
    val = v.mean(axis=0)
    return StatisticValue(StatisticKind.SAMPLE_MEAN, val if v.ndim > 1 else float(val), v.shape[0])


def ar_coefficients(traj: Trajectory):
    """Least-squares and Yule-Walker estimates of an AR(1) coefficient."""
    x = np.asarray(traj.values, float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("AR estimators need a scalar trajectory with T >= 2")
    num = float(np.dot(x[1:], x[:-1]))
    den_ls = float(np.dot(x[:-1], x[:-1]))
    den_yw = float(np.dot(x, x))
    if den_ls == 0.0 or den_yw == 0.0:
        raise DegenerateDataError("AR estimator denominator is zero")
    T = x.size
    return (
        StatisticValue(StatisticKind.LEAST_SQUARES_COEFF, num / den_ls, T),
        StatisticValue(StatisticKind.YULE_WALKER_COEFF, num / den_yw, T),
    )


def mean_map(family: Family, theta, nuisance=None):
    """Limit of the sample mean for a parametric family."""
    family = Family(family)
    theta = np.atleast_1d(np.asarray(theta, float))
    t = theta[0]
    if family is Family.NORMAL:
        return theta.copy() if theta.size > 1 else float(t)
    if family in (Family.EXPONENTIAL, Family.GEOMETRIC):
        return 1.0 / t
    if family is Family.GAMMA:
        return float(nuisance) * t
    if family is Family.BINOMIAL:
        return int(nuisance) * t
    return float(t)


def asymptotic_statistic(model, kind: StatisticKind):
    """The in-probability limit of the statistic under ``model``."""
    kind = StatisticKind(kind)
    if isinstance(model, FiniteIidModel) and kind is StatisticKind.EMPIRICAL_DIST:
        return model.probs.copy()
    if isinstance(model, MarkovDoubletModel) and kind is StatisticKind.DOUBLET_DIST:
        return model.doublet.copy()
    if isinstance(model, VarDriftModel) and kind is StatisticKind.SCALED_SAMPLE_MEAN:
        return model.drift.copy()
    if isinstance(model, ScalarArModel) and kind in (
        StatisticKind.LEAST_SQUARES_COEFF,
        StatisticKind.YULE_WALKER_COEFF,
    ):
        return model.coeff
    if isinstance(model, ParametricIidModel) and kind is StatisticKind.SAMPLE_MEAN:
        return mean_map(model.family, model.theta, model.nuisance)
    raise UsageError(f"{kind.value} is not defined for {type(model).__name__}")

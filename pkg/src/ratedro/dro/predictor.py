"""Distributionally robust predictors and the induced prescriptor."""
from __future__ import annotations

from typing import List, Sequence, Union

import numpy as np

from ..errors import UsageError
from ..rates import ArKind
from ..statistics import StatisticKind, StatisticValue
from .continuous import ar_ball_worst_case, ellipsoid_linear_worst_case
from .entropy import entropy_dro_dual, entropy_dual_batch
from .markov import markov_ball_worst_case
from .polytope import moment_set_worst_case, wasserstein_batch, wasserstein_set_worst_case
from .types import AmbiguitySpec, CostFunctionTable, LossTable, PredictorOutput, SpecKind

_LINEAR_STATS = (
    StatisticKind.EMPIRICAL_DIST,
    StatisticKind.DOUBLET_DIST,
    StatisticKind.SCALED_SAMPLE_MEAN,
    StatisticKind.SAMPLE_MEAN,
)
_AR_STATS = {ArKind.LS: StatisticKind.LEAST_SQUARES_COEFF, ArKind.YW: StatisticKind.YULE_WALKER_COEFF}
_SIMPLEX_SPECS = (SpecKind.ENTROPY, SpecKind.MOMENT, SpecKind.WASSERSTEIN)


def _incompatible(spec: AmbiguitySpec, s: StatisticValue, table) -> UsageError:
    return UsageError(f"{spec.kind.value} cannot be used with {s.kind.value} and {type(table).__name__}")


def predictor(table: Union[LossTable, CostFunctionTable], s: StatisticValue, spec: AmbiguitySpec) -> List[PredictorOutput]:
    """Evaluate the predictor for every decision of ``table``."""
    kind = spec.kind
    if isinstance(table, CostFunctionTable):
        if s.kind not in _AR_STATS.values():
            raise _incompatible(spec, s, table)
        est = float(s.value)
        if kind is SpecKind.EMPIRICAL:
            return [PredictorOutput(float(c(est)), np.array([est])) for c in table.costs]
        if kind is SpecKind.PENALIZED:
            return [PredictorOutput(float(c(est)) + spec.radius, np.array([est])) for c in table.costs]
        if kind is SpecKind.AR and _AR_STATS[spec.ar_kind] is s.kind:
            return [ar_ball_worst_case(c, est, spec.radius, spec.ar_kind) for c in table.costs]
        raise _incompatible(spec, s, table)

    if s.kind not in _LINEAR_STATS:
        raise _incompatible(spec, s, table)
    vec = np.asarray(s.value, float).ravel()
    if vec.size != table.d:
        raise UsageError(f"statistic has {vec.size} entries but the loss table has {table.d} states")
    L, off = table.losses, table.offsets

    if kind in (SpecKind.EMPIRICAL, SpecKind.PENALIZED):
        shift = spec.radius if kind is SpecKind.PENALIZED else 0.0
        return [PredictorOutput(float(L[x] @ vec + off[x] + shift), vec.copy()) for x in range(len(L))]
    if kind in _SIMPLEX_SPECS:
        if s.kind is not StatisticKind.EMPIRICAL_DIST:
            raise _incompatible(spec, s, table)
        if kind is SpecKind.ENTROPY:
            outs = [entropy_dro_dual(L[x], vec, spec.radius) for x in range(len(L))]
        elif kind is SpecKind.MOMENT:
            outs = [moment_set_worst_case(L[x], vec, spec.radius, spec.moments) for x in range(len(L))]
        else:
            outs = [wasserstein_set_worst_case(L[x], vec, spec.radius) for x in range(len(L))]
        return [_shifted(o, off[x]) for x, o in enumerate(outs)]
    if kind is SpecKind.CONDITIONAL_ENTROPY:
        if s.kind is not StatisticKind.DOUBLET_DIST:
            raise _incompatible(spec, s, table)
        m = int(round(np.sqrt(table.d)))
        sm = vec.reshape(m, m)
        return [_shifted(markov_ball_worst_case(L[x].reshape(m, m), sm, spec.radius), off[x]) for x in range(len(L))]
    if kind is SpecKind.ELLIPSOID:
        if s.kind not in (StatisticKind.SCALED_SAMPLE_MEAN, StatisticKind.SAMPLE_MEAN):
            raise _incompatible(spec, s, table)
        return [ellipsoid_linear_worst_case(L[x], off[x], vec, spec.sigma, spec.radius) for x in range(len(L))]
    raise _incompatible(spec, s, table)


def _shifted(out: PredictorOutput, c: float) -> PredictorOutput:
    if c == 0:
        return out
    return PredictorOutput(out.value + float(c), out.worst_case_model, out.branch, out.extra)


def prescriptor(predictions: Sequence[PredictorOutput]) -> int:
    """Index of the smallest predicted cost; ties go to the smallest index."""
    if len(predictions) == 0:
        raise UsageError("no predictions to choose from")
    best = 0
    for k, p in enumerate(predictions):
        if p.value < predictions[best].value:
            best = k
    return best


def predictor_values_batch(L, S, spec: AmbiguitySpec, offsets=None) -> np.ndarray:
    """Predictor values for many empirical distributions at once.

    ``S`` has one empirical distribution per row; the result has shape
    ``(len(S), n_decisions)``. Used by the Monte-Carlo harness.
    """
    L = np.atleast_2d(np.asarray(L, float))
    S = np.atleast_2d(np.asarray(S, float))
    off = np.zeros(L.shape[0]) if offsets is None else np.asarray(offsets, float)
    kind = spec.kind
    if kind is SpecKind.EMPIRICAL:
        out = S @ L.T
    elif kind is SpecKind.PENALIZED:
        out = S @ L.T + spec.radius
    elif kind is SpecKind.ENTROPY:
        n, nx = S.shape[0], L.shape[0]
        Lr = np.repeat(L[None, :, :], n, axis=0).reshape(n * nx, -1)
        Sr = np.repeat(S, nx, axis=0)
        out = entropy_dual_batch(Lr, Sr, spec.radius)[0].reshape(n, nx)
    elif kind is SpecKind.WASSERSTEIN:
        out = wasserstein_batch(L, S, spec.radius)
    elif kind is SpecKind.MOMENT:
        out = np.array(
            [[moment_set_worst_case(L[x], s, spec.radius, spec.moments).value for x in range(L.shape[0])] for s in S]
        ).reshape(S.shape[0], L.shape[0])
    else:
        raise UsageError(f"{kind.value} has no batch evaluator for empirical distributions")
    return out + off

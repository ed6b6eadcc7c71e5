"""Monte-Carlo evaluation of predictor-prescriptor pairs.

For each horizon ``T`` and trial the harness simulates fresh training data,
computes the statistic, picks the prescribed decision and records its
in-sample (predicted) and out-of-sample (true) cost. The fraction of trials
whose true cost strictly exceeds the prediction estimates the out-of-sample
disappointment, whose exponential decay in ``T`` is then regressed.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np

from ._rng import stream
from .dro import AmbiguitySpec, CostFunctionTable, LossTable, SpecKind, predictor, predictor_values_batch, prescriptor
from .errors import InsufficientDataError, ParameterDomainError, UsageError
from .processes import FiniteIidModel, MarkovDoubletModel, ParametricIidModel, ScalarArModel, VarDriftModel, _simulate_with
from .rates import _maximize_1d
from .statistics import (
    StatisticKind,
    ar_coefficients,
    asymptotic_statistic,
    doublet_distribution,
    empirical_distribution,
    sample_mean,
    scaled_sample_mean,
)

CURVE_COLUMNS = ("T", "trials", "p_hat", "mean_in_sample", "se_in_sample", "mean_out_of_sample", "spec", "radius", "seed")
FRONTIER_COLUMNS = ("spec", "radius", "decay_rate", "decay_r2", "points_used", "asymptotic_in_sample", "se")

_BATCH_SPECS = (SpecKind.EMPIRICAL, SpecKind.PENALIZED, SpecKind.ENTROPY, SpecKind.WASSERSTEIN, SpecKind.MOMENT)


@dataclass
class ExperimentConfig:
    process: object
    table: Union[LossTable, CostFunctionTable]
    specs: List[AmbiguitySpec]
    tgrid: List[int]
    trials: int
    seed: int = 0
    statistic: StatisticKind = StatisticKind.EMPIRICAL_DIST
    out: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        self.tgrid = [int(t) for t in self.tgrid]
        if int(self.trials) < 1:
            raise ParameterDomainError("trials must be at least 1")
        if not self.tgrid or any(t < 1 for t in self.tgrid):
            raise ParameterDomainError("the T grid must contain positive horizons")
        if any(b <= a for a, b in zip(self.tgrid, self.tgrid[1:])):
            raise ParameterDomainError("the T grid must be strictly increasing")
        if not self.specs:
            raise ParameterDomainError("at least one ambiguity spec is required")
        self.trials = int(self.trials)
        self.statistic = StatisticKind(self.statistic)


@dataclass(frozen=True)
class CurvePoint:
    T: int
    trials: int
    p_hat: float
    mean_in_sample: float
    se_in_sample: float
    mean_out_of_sample: float
    spec: str
    radius: float
    seed: int


@dataclass
class DisappointmentCurve:
    spec: AmbiguitySpec
    points: List[CurvePoint] = field(default_factory=list)


@dataclass(frozen=True)
class DecayEstimate:
    rate: float
    intercept: float
    r_squared: float
    points_used: int


@dataclass(frozen=True)
class FrontierPoint:
    spec: AmbiguitySpec
    decay_rate: DecayEstimate
    asymptotic_in_sample: float
    se: float


@dataclass(frozen=True)
class HalfSpaceEvent:
    """The event ``coeffs @ S >= threshold`` on the empirical distribution."""

    coeffs: np.ndarray
    threshold: float


# ---------------------------------------------------------------- scenarios


def newsvendor_scenario(k: float = 5.0, price: float = 7.0, n: int = 10, p: float = 0.5):
    """Newsvendor with shifted-binomial demand on ``{1, ..., n + 1}``.

    Returns the demand model and the loss table with
    ``l(x, i) = k x - price * min(x, i)`` for orders ``x`` in ``{1, ..., n + 1}``.
    """
    d = n + 1
    probs = np.array([math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(d)])
    states = np.arange(1, d + 1)
    losses = k * states[:, None] - price * np.minimum(states[:, None], states[None, :])
    return FiniteIidModel(probs / probs.sum()), LossTable(losses, tuple(int(x) for x in states))


# ---------------------------------------------------------------- simulation


def _trial_counts(model: FiniteIidModel, T: int, t_index: int, seed: int, lo: int, hi: int) -> np.ndarray:
    """State counts of trials ``lo..hi-1`` at horizon ``T`` (one row per trial)."""
    d = model.d
    out = np.empty((hi - lo, d), dtype=np.int64)
    for k, trial in enumerate(range(lo, hi)):
        traj = _simulate_with(model, T, stream(seed, t_index, trial))
        out[k] = np.bincount(traj.values - 1, minlength=d)
    return out


def _chunks(trials: int, workers: int):
    n = max(1, min(workers * 4, trials))
    edges = np.linspace(0, trials, n + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _all_counts(model, T, t_index, seed, trials, workers) -> np.ndarray:
    if workers <= 1:
        return _trial_counts(model, T, t_index, seed, 0, trials)
    parts = _chunks(trials, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_trial_counts, model, T, t_index, seed, a, b) for a, b in parts]
        return np.vstack([f.result() for f in futs])


def compute_statistic(model, traj, kind: StatisticKind):
    kind = StatisticKind(kind)
    if kind is StatisticKind.EMPIRICAL_DIST:
        return empirical_distribution(traj, model.d)
    if kind is StatisticKind.DOUBLET_DIST:
        return doublet_distribution(traj, model.m)
    if kind is StatisticKind.SCALED_SAMPLE_MEAN:
        return scaled_sample_mean(traj, model.coeff)
    if kind is StatisticKind.SAMPLE_MEAN:
        return sample_mean(traj)
    ls, yw = ar_coefficients(traj)
    return ls if kind is StatisticKind.LEAST_SQUARES_COEFF else yw


def _aggregate(T, in_s, out_s, spec: AmbiguitySpec, seed) -> CurvePoint:
    n = in_s.size
    hits = int(np.count_nonzero(out_s > in_s))
    se = float(np.std(in_s, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return CurvePoint(
        T=int(T),
        trials=n,
        p_hat=hits / n,
        mean_in_sample=float(np.mean(in_s)),
        se_in_sample=se,
        mean_out_of_sample=float(np.mean(out_s)),
        spec=spec.label,
        radius=spec.radius,
        seed=int(seed),
    )


def _curve_point_batched(config: ExperimentConfig, spec, T, t_index) -> CurvePoint:
    model, table = config.process, config.table
    counts = _all_counts(model, T, t_index, config.seed, config.trials, config.workers)
    uniq, inverse = np.unique(counts, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    values = predictor_values_batch(table.losses, uniq / T, spec, table.offsets)
    choice = np.argmin(values, axis=1)  # first minimizer on ties
    in_u = values[np.arange(len(uniq)), choice]
    true_cost = table.losses @ model.probs + table.offsets
    out_u = true_cost[choice]
    return _aggregate(T, in_u[inverse], out_u[inverse], spec, config.seed)


def _true_cost(table, theta_star, x: int) -> float:
    if isinstance(table, CostFunctionTable):
        return float(table.costs[x](theta_star))
    return float(table.losses[x] @ np.ravel(theta_star) + table.offsets[x])


def _curve_point_generic(config: ExperimentConfig, spec, T, t_index) -> CurvePoint:
    model, table = config.process, config.table
    theta_star = asymptotic_statistic(model, config.statistic)
    in_s = np.empty(config.trials)
    out_s = np.empty(config.trials)
    for trial in range(config.trials):
        traj = _simulate_with(model, T, stream(config.seed, t_index, trial))
        stat = compute_statistic(model, traj, config.statistic)
        try:
            preds = predictor(table, stat, spec)
        except Exception as exc:  # add trial context, keep the original type
            raise type(exc)(f"{exc} (T={T}, trial={trial})") from exc
        x = prescriptor(preds)
        in_s[trial] = preds[x].value
        out_s[trial] = _true_cost(table, theta_star, x)
    return _aggregate(T, in_s, out_s, spec, config.seed)


def run_curve(config: ExperimentConfig, spec: Optional[AmbiguitySpec] = None) -> DisappointmentCurve:
    """Monte-Carlo disappointment curve of one ambiguity spec over the T grid."""
    spec = config.specs[0] if spec is None else spec
    batched = (
        isinstance(config.process, FiniteIidModel)
        and isinstance(config.table, LossTable)
        and config.statistic is StatisticKind.EMPIRICAL_DIST
        and spec.kind in _BATCH_SPECS
    )
    step = _curve_point_batched if batched else _curve_point_generic
    curve = DisappointmentCurve(spec)
    for t_index, T in enumerate(config.tgrid):
        curve.points.append(step(config, spec, T, t_index))
    return curve


# ---------------------------------------------------------------- regression


def _fit_log_linear(T: np.ndarray, p: np.ndarray) -> DecayEstimate:
    keep = p > 0
    if np.count_nonzero(keep) < 3:
        raise InsufficientDataError("need at least 3 points with positive frequency")
    x = T[keep].astype(float)
    y = np.log(p[keep])
    xc = x - x.mean()
    slope = float(xc @ (y - y.mean()) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(resid @ resid)
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayEstimate(rate=max(0.0, -slope), intercept=intercept, r_squared=r2, points_used=int(keep.sum()))


def estimate_decay_rate(curve: DisappointmentCurve) -> DecayEstimate:
    """Least-squares fit of ``log p_hat`` against ``T`` over points with ``p_hat > 0``."""
    T = np.array([pt.T for pt in curve.points])
    p = np.array([pt.p_hat for pt in curve.points])
    return _fit_log_linear(T, p)


def _with_radius(spec: AmbiguitySpec, radius: float) -> AmbiguitySpec:
    return AmbiguitySpec(spec.kind, radius, spec.sigma, spec.ar_kind, spec.moments)


def frontier(config: ExperimentConfig, radii: Sequence[float], kinds: Optional[Iterable[AmbiguitySpec]] = None) -> List[FrontierPoint]:
    """Decay rate and asymptotic in-sample cost per (spec kind, radius), sorted by rate."""
    if len(radii) == 0:
        raise ParameterDomainError("the radius grid is empty")
    bases = list(config.specs if kinds is None else kinds)
    points = []
    for base in bases:
        for r in radii:
            spec = _with_radius(base, r)
            curve = run_curve(config, spec)
            last = curve.points[-1]
            points.append(FrontierPoint(spec, estimate_decay_rate(curve), last.mean_in_sample, last.se_in_sample))
    points.sort(key=lambda fp: (fp.decay_rate.rate, fp.spec.label, fp.spec.radius))
    return points


# ---------------------------------------------------------------- Sanov check


def predicted_event_rate(theta, event: HalfSpaceEvent) -> float:
    """``inf {D(s || theta) : coeffs @ s >= threshold}`` via its concave scalar dual."""
    theta = np.asarray(theta, float)
    a = np.asarray(event.coeffs, float)
    b = float(event.threshold)
    if a @ theta >= b:
        return 0.0
    if b > a.max():
        return math.inf
    logt = np.log(theta)

    def dual(lam):
        if lam < 0:
            return -math.inf
        z = logt + lam * a
        zmax = z.max()
        return lam * b - (zmax + math.log(np.exp(z - zmax).sum()))

    _, val = _maximize_1d(dual, 0.0)
    return max(val, 0.0)


def sanov_check(
    model: FiniteIidModel,
    event: HalfSpaceEvent,
    tgrid: Sequence[int],
    trials: int,
    seed: int,
    workers: int = 1,
):
    """Measured versus predicted decay rate of ``P[coeffs @ S_T >= threshold]``."""
    a = np.asarray(event.coeffs, float)
    T_arr = np.asarray(tgrid, dtype=int)
    p = np.empty(T_arr.size)
    for t_index, T in enumerate(T_arr):
        counts = _all_counts(model, int(T), t_index, seed, trials, workers)
        # Compare on the count scale; the slack absorbs rounding of T * threshold.
        hit = counts @ a >= event.threshold * T - 1e-9
        p[t_index] = np.count_nonzero(hit) / trials
    measured = _fit_log_linear(T_arr, p)
    return measured, predicted_event_rate(model.probs, event)


# ---------------------------------------------------------------- CSV


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _curve_rows(records):
    rows = sorted(records, key=lambda r: (r.T, r.spec, r.radius))
    return [[_fmt(getattr(r, c)) for c in CURVE_COLUMNS] for r in rows]


def _frontier_rows(records):
    rows = sorted(records, key=lambda r: (r.spec.label, r.spec.radius))
    return [
        [
            r.spec.label,
            _fmt(r.spec.radius),
            _fmt(r.decay_rate.rate),
            _fmt(r.decay_rate.r_squared),
            _fmt(r.decay_rate.points_used),
            _fmt(r.asymptotic_in_sample),
            _fmt(r.se),
        ]
        for r in rows
    ]


def write_csv(records, path, schema: Optional[str] = None) -> None:
    """Write curve points or frontier points as UTF-8 CSV with a header row.

    ``path`` may also be an open text stream. ``schema`` ("curve" or
    "frontier") is only needed for an empty list.
    Curves (or lists of curves) are flattened into their points.
    """
    flat = []
    for r in records:
        flat.extend(r.points if isinstance(r, DisappointmentCurve) else [r])
    if schema is None:
        schema = "frontier" if flat and isinstance(flat[0], FrontierPoint) else "curve"
    if schema == "curve":
        header, rows = CURVE_COLUMNS, _curve_rows(flat)
    elif schema == "frontier":
        header, rows = FRONTIER_COLUMNS, _frontier_rows(flat)
    else:
        raise UsageError(f"unknown CSV schema {schema!r}")
    if hasattr(path, "write"):
        w = csv.writer(path, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_curve_csv(path) -> List[CurvePoint]:
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.DictReader(fh)
        return [
            CurvePoint(
                T=int(row["T"]),
                trials=int(row["trials"]),
                p_hat=float(row["p_hat"]),
                mean_in_sample=float(row["mean_in_sample"]),
                se_in_sample=float(row["se_in_sample"]),
                mean_out_of_sample=float(row["mean_out_of_sample"]),
                spec=row["spec"],
                radius=float(row["radius"]),
                seed=int(row["seed"]),
            )
            for row in rd
        ]

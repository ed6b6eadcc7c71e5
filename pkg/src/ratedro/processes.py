"""Parameterized stochastic-process models and seeded simulators.

Five model families are supported: finite-state i.i.d., finite-state Markov
chains parameterized by their stationary doublet distribution, vector
autoregressions with unknown drift, scalar AR(1) processes with unknown
coefficient, and the classical one-parameter i.i.d. families.

All models are frozen dataclasses holding read-only arrays, so they may be
shared freely between threads and processes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ._rng import stream
from .errors import ParameterDomainError, StabilityError

_SUM_TOL = 1e-12
_BALANCE_TOL = 1e-10


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


class Family(str, enum.Enum):
    NORMAL = "normal"
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    POISSON = "poisson"
    BERNOULLI = "bernoulli"
    GEOMETRIC = "geometric"
    BINOMIAL = "binomial"


# Sentinel accepted by the rate functions in place of a parametric family.
FINITE_IID = "finite_iid"


@dataclass(frozen=True)
class FiniteIidModel:
    """I.i.d. draws from ``{1, ..., d}`` with strictly positive weights."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 2:
            raise ParameterDomainError("probs must be a vector with at least two entries")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ParameterDomainError("probs must be strictly positive")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise ParameterDomainError(f"probs sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class MarkovDoubletModel:
    """Stationary Markov chain on ``{1, ..., m}`` given by its doublet law.

    ``doublet[i, j]`` is the stationary probability of the transition
    ``i -> j``. Row and column sums must agree (both equal the stationary
    distribution). ``initial_state`` is the deterministic state before the
    first observed transition; it does not affect asymptotics.
    """

    doublet: np.ndarray
    initial_state: int = 1

    def __post_init__(self):
        th = _frozen(self.doublet)
        if th.ndim != 2 or th.shape[0] != th.shape[1] or th.shape[0] < 2:
            raise ParameterDomainError("doublet must be an m x m matrix with m >= 2")
        if not np.all(np.isfinite(th)) or np.any(th <= 0):
            raise ParameterDomainError("doublet entries must be strictly positive")
        if abs(th.sum() - 1.0) > _SUM_TOL:
            raise ParameterDomainError(f"doublet sums to {th.sum()!r}, not 1")
        if np.max(np.abs(th.sum(axis=1) - th.sum(axis=0))) > _BALANCE_TOL:
            raise ParameterDomainError("doublet row sums and column sums differ")
        if not 1 <= int(self.initial_state) <= th.shape[0]:
            raise ParameterDomainError("initial_state must lie in 1..m")
        object.__setattr__(self, "doublet", th)
        object.__setattr__(self, "initial_state", int(self.initial_state))

    @property
    def m(self) -> int:
        return self.doublet.shape[0]


@dataclass(frozen=True)
class VarDriftModel:
    """``xi_t = theta + A xi_{t-1} + w_t`` with ``w_t ~ N(0, Sigma)``."""

    drift: np.ndarray
    coeff: np.ndarray
    noise_cov: np.ndarray
    stationary_cov: np.ndarray = field(init=False)

    def __post_init__(self):
        theta = _frozen(np.atleast_1d(self.drift))
        A = _frozen(np.atleast_2d(self.coeff))
        S = _frozen(np.atleast_2d(self.noise_cov))
        d = theta.size
        if theta.ndim != 1 or A.shape != (d, d) or S.shape != (d, d):
            raise ParameterDomainError("drift, coeff and noise_cov have inconsistent shapes")
        if np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
            raise ParameterDomainError("coeff must have spectral radius below 1")
        _check_spd(S, "noise_cov")
        object.__setattr__(self, "drift", theta)
        object.__setattr__(self, "coeff", A)
        object.__setattr__(self, "noise_cov", S)
        object.__setattr__(self, "stationary_cov", _frozen(solve_lyapunov(A, S)))

    @property
    def d(self) -> int:
        return self.drift.size

    @property
    def stationary_mean(self) -> np.ndarray:
        return np.linalg.solve(np.eye(self.d) - self.coeff, self.drift)


@dataclass(frozen=True)
class ScalarArModel:
    """``xi_t = theta xi_{t-1} + w_t`` with ``w_t ~ N(mu, sigma^2)``."""

    coeff: float
    noise_mean: float = 0.0
    noise_var: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.coeff) and -1.0 < self.coeff < 1.0):
            raise ParameterDomainError("coeff must lie in (-1, 1)")
        if not (np.isfinite(self.noise_var) and self.noise_var > 0):
            raise ParameterDomainError("noise_var must be positive")
        if not np.isfinite(self.noise_mean):
            raise ParameterDomainError("noise_mean must be finite")
        for name in ("coeff", "noise_mean", "noise_var"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def stationary_mean(self) -> float:
        return self.noise_mean / (1.0 - self.coeff)

    @property
    def stationary_var(self) -> float:
        return self.noise_var / (1.0 - self.coeff**2)


@dataclass(frozen=True)
class ParametricIidModel:
    """I.i.d. draws from a one-parameter family.

    ``nuisance`` is the covariance matrix for ``NORMAL``, the shape ``k``
    for ``GAMMA`` (``theta`` is the scale), the number of trials ``N`` for
    ``BINOMIAL`` and ``None`` otherwise. ``GEOMETRIC`` counts trials up to
    and including the first success, so its support starts at 1.
    """

    family: Family
    theta: np.ndarray
    nuisance: object = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        theta = _frozen(np.atleast_1d(self.theta))
        if theta.ndim != 1 or not np.all(np.isfinite(theta)):
            raise ParameterDomainError("theta must be a finite vector")
        if fam is not Family.NORMAL and theta.size != 1:
            raise ParameterDomainError(f"{fam.value} takes a scalar theta")
        t = theta[0]
        if fam in (Family.EXPONENTIAL, Family.GAMMA, Family.POISSON) and not t > 0:
            raise ParameterDomainError(f"{fam.value} requires theta > 0")
        if fam in (Family.BERNOULLI, Family.GEOMETRIC, Family.BINOMIAL) and not 0 < t < 1:
            raise ParameterDomainError(f"{fam.value} requires theta in (0, 1)")
        nuis = self.nuisance
        if fam is Family.NORMAL:
            nuis = np.eye(theta.size) if nuis is None else np.atleast_2d(np.asarray(nuis, float))
            if nuis.shape != (theta.size, theta.size):
                raise ParameterDomainError("covariance shape does not match theta")
            _check_spd(nuis, "covariance")
            nuis = _frozen(nuis)
        elif fam is Family.GAMMA:
            if nuis is None or not float(nuis) > 0:
                raise ParameterDomainError("gamma requires shape k > 0")
            nuis = float(nuis)
        elif fam is Family.BINOMIAL:
            if nuis is None or int(nuis) != nuis or int(nuis) < 1:
                raise ParameterDomainError("binomial requires an integer N >= 1")
            nuis = int(nuis)
        else:
            nuis = None
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nuisance", nuis)


ProcessModel = Union[FiniteIidModel, MarkovDoubletModel, VarDriftModel, ScalarArModel, ParametricIidModel]


@dataclass(frozen=True)
class Trajectory:
    """Observed history. ``prepended_state`` holds the Markov ``xi_0``."""

    values: np.ndarray
    prepended_state: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim == 0 or len(v) < 1:
            raise ParameterDomainError("a trajectory needs at least one observation")
        object.__setattr__(self, "values", _frozen(v, dtype=v.dtype))

    def __len__(self) -> int:
        return len(self.values)


def _check_spd(S: np.ndarray, name: str) -> None:
    if not np.allclose(S, S.T, rtol=0, atol=1e-12):
        raise ParameterDomainError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ParameterDomainError(f"{name} must be positive definite") from None


def solve_lyapunov(A, Sigma, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Solve ``R = A R A^T + Sigma`` by fixed-point iteration from ``R = Sigma``."""
    A = np.atleast_2d(np.asarray(A, float))
    S = np.atleast_2d(np.asarray(Sigma, float))
    R = S.copy()
    for _ in range(max_iter):
        if np.linalg.norm(R - A @ R @ A.T - S) <= tol:
            return R
        R = S + A @ R @ A.T
    raise StabilityError(f"Lyapunov iteration did not converge in {max_iter} steps")


def markov_derived(model: MarkovDoubletModel):
    """Return the stationary distribution and transition matrix of the chain."""
    pi = model.doublet.sum(axis=1)
    P = model.doublet / pi[:, None]
    return pi, P


def _inverse_cdf(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    # The last cdf entry can round below 1; clip keeps u ~ 1 in range.
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def simulate(model: ProcessModel, T: int, seed: int) -> Trajectory:
    """Draw a length-``T`` trajectory. Shorter horizons give prefixes."""
    if int(T) != T or T < 1:
        raise ParameterDomainError("horizon must be a positive integer")
    T = int(T)
    return _simulate_with(model, T, stream(seed))


def _simulate_with(model: ProcessModel, T: int, rng: np.random.Generator) -> Trajectory:
    if isinstance(model, FiniteIidModel):
        cdf = np.cumsum(model.probs)
        return Trajectory(_inverse_cdf(cdf, rng.random(T)) + 1)

    if isinstance(model, MarkovDoubletModel):
        _, P = markov_derived(model)
        cdf = np.cumsum(P, axis=1)
        u = rng.random(T)
        out = np.empty(T, dtype=np.int64)
        state = model.initial_state - 1
        for t in range(T):
            row = cdf[state]
            state = min(int(np.searchsorted(row, u[t], side="right")), model.m - 1)
            out[t] = state
        return Trajectory(out + 1, prepended_state=model.initial_state)

    if isinstance(model, VarDriftModel):
        d = model.d
        z = rng.standard_normal((T, d))
        L0 = np.linalg.cholesky(model.stationary_cov)
        Ls = np.linalg.cholesky(model.noise_cov)
        out = np.empty((T, d))
        out[0] = model.stationary_mean + L0 @ z[0]
        noise = z[1:] @ Ls.T
        for t in range(1, T):
            out[t] = model.drift + model.coeff @ out[t - 1] + noise[t - 1]
        return Trajectory(out)

    if isinstance(model, ScalarArModel):
        z = rng.standard_normal(T)
        out = np.empty(T)
        out[0] = model.stationary_mean + np.sqrt(model.stationary_var) * z[0]
        w = model.noise_mean + np.sqrt(model.noise_var) * z[1:]
        th = model.coeff
        for t in range(1, T):
            out[t] = th * out[t - 1] + w[t - 1]
        return Trajectory(out)

    if isinstance(model, ParametricIidModel):
        fam, th = model.family, model.theta
        if fam is Family.NORMAL:
            L = np.linalg.cholesky(model.nuisance)
            vals = th + rng.standard_normal((T, th.size)) @ L.T
            return Trajectory(vals[:, 0] if th.size == 1 else vals)
        t = th[0]
        if fam is Family.EXPONENTIAL:
            vals = rng.exponential(1.0 / t, T)
        elif fam is Family.GAMMA:
            vals = rng.gamma(model.nuisance, t, T)
        elif fam is Family.POISSON:
            vals = rng.poisson(t, T)
        elif fam is Family.BERNOULLI:
            vals = (rng.random(T) < t).astype(np.int64)
        elif fam is Family.GEOMETRIC:
            vals = rng.geometric(t, T)
        else:
            vals = rng.binomial(model.nuisance, t, T)
        return Trajectory(vals)

    raise ParameterDomainError(f"unsupported model type {type(model).__name__}")

"""Rate functions, limiting log-moment generating functions and conjugates.

Every rate function returns an extended real: ``math.inf`` stands for
``+infinity`` and is compared, never used in arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp, xlogy

from .errors import DomainError
from .processes import FINITE_IID, Family, Trajectory
from .statistics import empirical_distribution

INF = math.inf
_SIMPLEX_TOL = 1e-9
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class RateKind(str, enum.Enum):
    RELATIVE_ENTROPY = "relative_entropy"
    CONDITIONAL_RELATIVE_ENTROPY = "conditional_relative_entropy"
    GAUSSIAN_QUADRATIC = "gaussian_quadratic"
    AR_LEAST_SQUARES = "ar_ls"
    AR_YULE_WALKER = "ar_yw"
    CRAMER = "cramer"


class ArKind(str, enum.Enum):
    LS = "ls"
    YW = "yw"


@dataclass(frozen=True)
class RateSpec:
    """Selects a rate function ``I(s, theta)``.

    ``nuisance`` is the covariance for ``GAUSSIAN_QUADRATIC``; for ``CRAMER``
    it is the family nuisance and ``family`` names the family.
    """

    kind: RateKind
    nuisance: object = None
    family: Optional[Family] = None

    def __post_init__(self):
        kind = RateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is RateKind.GAUSSIAN_QUADRATIC:
            S = np.atleast_2d(np.asarray(self.nuisance, float))
            try:
                np.linalg.cholesky(S)
            except np.linalg.LinAlgError:
                raise DomainError("covariance must be positive definite") from None
            object.__setattr__(self, "nuisance", S)
        if kind is RateKind.CRAMER:
            if self.family is None:
                raise DomainError("a Cramer rate needs a family")
            object.__setattr__(self, "family", Family(self.family))

    def __call__(self, s, theta) -> float:
        k = self.kind
        if k is RateKind.RELATIVE_ENTROPY:
            return relative_entropy(s, theta)
        if k is RateKind.CONDITIONAL_RELATIVE_ENTROPY:
            return conditional_relative_entropy(s, theta)
        if k is RateKind.GAUSSIAN_QUADRATIC:
            return gaussian_quadratic_rate(s, theta, self.nuisance)
        if k is RateKind.AR_LEAST_SQUARES:
            return ar_rate(s, theta, ArKind.LS)
        if k is RateKind.AR_YULE_WALKER:
            return ar_rate(s, theta, ArKind.YW)
        return cramer_rate(self.family, s, theta, self.nuisance)


def transformed_rate(rate: Callable, psi_inv: Callable) -> Callable:
    """Rate of the statistic ``psi(S)`` for an invertible ``psi``."""
    return lambda s, theta: rate(psi_inv(s), theta)


def _check_simplex(p: np.ndarray, name: str) -> None:
    if np.any(~np.isfinite(p)) or np.any(p < -_SIMPLEX_TOL) or abs(p.sum() - 1.0) > _SIMPLEX_TOL:
        raise DomainError(f"{name} is not on the probability simplex")


def relative_entropy(s, theta) -> float:
    """Kullback-Leibler divergence ``D(s || theta)`` on the simplex."""
    s = np.asarray(s, float)
    theta = np.asarray(theta, float)
    if s.shape != theta.shape:
        raise DomainError("s and theta have different shapes")
    _check_simplex(s, "s")
    _check_simplex(theta, "theta")
    pos = s > 0
    if np.any(theta[pos] <= 0):
        return INF
    return max(float(np.sum(s[pos] * np.log(s[pos] / theta[pos]))), 0.0)


def conditional_relative_entropy_batch(s: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Vectorized conditional relative entropy of ``s`` against a stack of doublets.

    ``thetas`` has shape ``(n, m, m)``; no validation is performed.
    """
    s = np.asarray(s, float)
    thetas = np.asarray(thetas, float)
    pos = s > 0
    rs = s.sum(axis=1, keepdims=True)
    # log(s_ij / row_i(s)) restricted to the support of s
    log_ps = np.where(pos, np.log(np.where(pos, s, 1.0) / np.where(rs > 0, rs, 1.0)), 0.0)
    rt = thetas.sum(axis=2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pt = np.log(thetas) - np.log(rt)
    zero_hit = np.any((thetas <= 0) & pos, axis=(1, 2))
    terms = np.where(pos, s * (log_ps - np.where(pos, log_pt, 0.0)), 0.0)
    out = terms.sum(axis=(1, 2))
    out = np.maximum(out, 0.0)
    out[zero_hit] = INF
    return out


def conditional_relative_entropy(s, theta) -> float:
    """Visitation-weighted divergence between transition rows of two doublets."""
    s = np.asarray(s, float)
    theta = np.asarray(theta, float)
    if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape != theta.shape:
        raise DomainError("s and theta must be m x m matrices of equal shape")
    _check_simplex(s.ravel(), "s")
    _check_simplex(theta.ravel(), "theta")
    return float(conditional_relative_entropy_batch(s, theta[None])[0])


def gaussian_quadratic_rate(s, theta, Sigma) -> float:
    """``0.5 (s - theta)^T Sigma^{-1} (s - theta)``."""
    diff = np.atleast_1d(np.asarray(s, float) - np.asarray(theta, float))
    S = np.atleast_2d(np.asarray(Sigma, float))
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DomainError("Sigma must be symmetric positive definite") from None
    z = np.linalg.solve(L, diff)
    return 0.5 * float(z @ z)


def ar_breakpoints(theta: float):
    """Interval ``[a, b]`` on which the least-squares rate uses its interior form."""
    root = math.sqrt(theta * theta + 8.0)
    return 0.25 * (theta - root), 0.25 * (theta + root)


def _ar_interior(s: float, theta: float) -> float:
    if s == theta:
        return 0.0
    den = 1.0 - s * s
    num = 1.0 - 2.0 * theta * s + theta * theta
    if den <= 0.0:
        return INF
    return max(0.5 * math.log(num / den), 0.0)


def ar_rate(s: float, theta: float, kind) -> float:
    """Rate of the least-squares or Yule-Walker AR(1) coefficient estimator."""
    kind = ArKind(kind)
    s = float(s)
    theta = float(theta)
    if not -1.0 <= theta <= 1.0:
        raise DomainError("theta must lie in [-1, 1]")
    if kind is ArKind.LS:
        a, b = ar_breakpoints(theta)
        if a <= s <= b:
            return _ar_interior(s, theta)
        return max(math.log(abs(theta - 2.0 * s)), 0.0)
    if -1.0 < s < 1.0:
        return _ar_interior(s, theta)
    if s == theta:
        return 0.0
    return INF


def _scalar_theta(theta) -> float:
    return float(np.atleast_1d(np.asarray(theta, float))[0])


def _check_family_theta(family: Family, theta, nuisance) -> None:
    if family is Family.NORMAL:
        return
    t = _scalar_theta(theta)
    if family in (Family.EXPONENTIAL, Family.GAMMA, Family.POISSON) and not t > 0:
        raise DomainError(f"{family.value} requires theta > 0")
    if family in (Family.BERNOULLI, Family.GEOMETRIC, Family.BINOMIAL) and not 0 < t < 1:
        raise DomainError(f"{family.value} requires theta in (0, 1)")
    if family is Family.GAMMA and not (nuisance is not None and nuisance > 0):
        raise DomainError("gamma requires shape k > 0")
    if family is Family.BINOMIAL and not (nuisance is not None and int(nuisance) >= 1):
        raise DomainError("binomial requires N >= 1")


def cramer_rate(family, s, theta, nuisance=None) -> float:
    """Closed-form conjugate of the log-MGF for a parametric i.i.d. family.

    At finite endpoints of the mean range (for example ``s = 0`` for
    Poisson) the lower semicontinuous value is returned, which is finite.
    """
    if family == FINITE_IID:
        return relative_entropy(s, theta)
    family = Family(family)
    _check_family_theta(family, theta, nuisance)
    if family is Family.NORMAL:
        theta = np.atleast_1d(np.asarray(theta, float))
        S = np.eye(theta.size) if nuisance is None else nuisance
        return gaussian_quadratic_rate(s, theta, S)
    s = float(np.asarray(s, float).reshape(-1)[0])
    t = _scalar_theta(theta)
    if family is Family.EXPONENTIAL:
        return t * s - 1.0 - math.log(t * s) if s > 0 else INF
    if family is Family.GAMMA:
        k = float(nuisance)
        return s / t - k + k * math.log(k * t / s) if s > 0 else INF
    if family is Family.POISSON:
        return float(xlogy(s, s / t) - s + t) if s >= 0 else INF
    if family is Family.BERNOULLI:
        return _binary_kl(s, t) if 0 <= s <= 1 else INF
    if family is Family.GEOMETRIC:
        if s < 1:
            return INF
        return float(xlogy(s - 1.0, (s - 1.0) / (s * (1.0 - t)))) - math.log(t * s)
    N = int(nuisance)
    return N * _binary_kl(s / N, t) if 0 <= s <= N else INF


def _binary_kl(q: float, t: float) -> float:
    return max(float(xlogy(q, q / t) + xlogy(1.0 - q, (1.0 - q) / (1.0 - t))), 0.0)


def limit_log_mgf(family, lam, theta, nuisance=None) -> float:
    """Limiting log-MGF ``Lambda(lambda, theta)``; ``+inf`` off its domain."""
    if family == FINITE_IID:
        theta = np.asarray(theta, float)
        lam = np.asarray(lam, float)
        return float(logsumexp(lam, b=theta))
    family = Family(family)
    _check_family_theta(family, theta, nuisance)
    if family is Family.NORMAL:
        theta = np.atleast_1d(np.asarray(theta, float))
        lam = np.atleast_1d(np.asarray(lam, float))
        S = np.eye(theta.size) if nuisance is None else np.atleast_2d(nuisance)
        return float(theta @ lam + 0.5 * lam @ S @ lam)
    lam = float(np.asarray(lam, float).reshape(-1)[0])
    t = _scalar_theta(theta)
    if family is Family.EXPONENTIAL:
        return math.log(t / (t - lam)) if lam < t else INF
    if family is Family.GAMMA:
        k = float(nuisance)
        return -k * math.log1p(-t * lam) if lam < 1.0 / t else INF
    if family is Family.POISSON:
        return t * math.expm1(lam) if lam < 700 else INF
    if family is Family.BERNOULLI:
        return float(np.logaddexp(math.log1p(-t), math.log(t) + lam))
    if family is Family.GEOMETRIC:
        if lam >= -math.log1p(-t):
            return INF
        return lam + math.log(t) - math.log1p(-(1.0 - t) * math.exp(lam))
    N = int(nuisance)
    return N * float(np.logaddexp(math.log1p(-t), math.log(t) + lam))


_DIVERGED = 1e8


def _maximize_1d(f: Callable[[float], float], x0: float, tol: float = 1e-10):
    """Maximize a concave ``f`` by bracket expansion plus golden-section search.

    Returns ``(x, f(x))``; the value is ``inf`` once it exceeds ``1e8``.
    """
    fb = f(x0)
    if fb > _DIVERGED:
        return x0, INF
    h = 1.0
    fr, fl = f(x0 + h), f(x0 - h)
    if fr > fb:
        a, b, fbest, step = x0, x0 + h, fr, h
    elif fl > fb:
        a, b, fbest, step = x0, x0 - h, fl, -h
    else:
        a, b, c = x0 - h, x0, x0 + h
        fbest = fb
        step = None
    if step is not None:
        # Walk uphill, doubling the stride, until the objective stops improving.
        while True:
            if fbest > _DIVERGED:
                return b, INF
            c = b + 2.0 * step
            step *= 2.0
            fc = f(c)
            if not fc > fbest or abs(c) > 1e15:
                break
            a, b, fbest = b, c, fc
        if fc > _DIVERGED:
            return c, INF
    lo, hi = min(a, c), max(a, c)
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol and hi - lo > 4e-16 * max(abs(lo), abs(hi)):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    cands = [(fbest, b), (f1, x1), (f2, x2)]
    fx, x = max(cands)
    return x, (INF if fx > _DIVERGED else fx)


def numerical_conjugate(Lam: Callable, s, max_sweeps: int = 2000) -> float:
    """Numerically evaluate ``sup_lambda <lambda, s> - Lam(lambda)``.

    Scalar ``s`` uses a single bracketed golden-section search; vector ``s``
    uses coordinate-wise ascent with the same line search.
    """
    def objective(lam):
        v = Lam(lam)
        if v == INF or not np.isfinite(v):
            return -INF
        return float(np.dot(lam, s)) - v

    if np.ndim(s) == 0:
        s = float(s)
        _, val = _maximize_1d(lambda x: objective(x), 0.0)
        return max(val, 0.0)

    s = np.asarray(s, float)
    lam = np.zeros(s.size)
    best = objective(lam)
    for _ in range(max_sweeps):
        prev = best
        for i in range(s.size):
            def along(x, i=i):
                trial = lam.copy()
                trial[i] = x
                return objective(trial)
            x, val = _maximize_1d(along, lam[i])
            if val == INF:
                return INF
            if val > best:
                lam[i], best = x, val
        if best - prev <= 1e-15 * max(1.0, abs(best)):
            break
    return max(best, 0.0)


def rn_derivative_finite_iid(theta, traj: Trajectory):
    """Log-likelihood ratio against the uniform law, in two algebraic forms."""
    theta = np.asarray(theta, float)
    d = theta.size
    x = np.asarray(traj.values) - 1
    T = x.size
    direct = T * math.log(d) + float(np.sum(np.log(theta[x])))
    S = empirical_distribution(traj, d).value
    expfam = float(np.dot(T * np.log(theta), S)) + T * math.log(d)
    return direct, expfam


def grad_limit_log_mgf_at_zero(family, theta, nuisance=None, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of ``Lambda(., theta)`` at zero."""
    if family == FINITE_IID:
        dim = np.asarray(theta).size
    elif Family(family) is Family.NORMAL:
        dim = np.atleast_1d(theta).size
    else:
        dim = 1
    grad = np.empty(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        up = limit_log_mgf(family, e if dim > 1 or family == FINITE_IID else h, theta, nuisance)
        dn = limit_log_mgf(family, -e if dim > 1 or family == FINITE_IID else -h, theta, nuisance)
        grad[i] = (up - dn) / (2.0 * h)
    return grad


def conjugate_grid(family, theta, nuisance=None, n: int = 20) -> np.ndarray:
    """``n`` interior points of the mean range around the true mean (scalar families)."""
    family = Family(family)
    t = _scalar_theta(theta)
    if family is Family.NORMAL:
        sd = math.sqrt(float(np.atleast_2d(1.0 if nuisance is None else nuisance)[0, 0]))
        return np.linspace(t - 3 * sd, t + 3 * sd, n)
    if family is Family.EXPONENTIAL:
        return np.linspace(0.1, 3.0, n) / t
    if family is Family.GAMMA:
        return np.linspace(0.1, 3.0, n) * float(nuisance) * t
    if family is Family.POISSON:
        return np.linspace(0.0, 3.0 * t, n)
    if family is Family.BERNOULLI:
        return np.linspace(0.02, 0.98, n)
    if family is Family.GEOMETRIC:
        return 1.0 + np.linspace(0.05, 3.0, n) * (1.0 / t - 1.0)
    N = int(nuisance)
    return np.linspace(0.02, 0.98, n) * N


def conjugate_check(family, theta, nuisance=None, grid=None):
    """Rows ``(s, closed_form, numerical)`` comparing the Cramer rate with its conjugate form."""
    if grid is None:
        if family == FINITE_IID:
            raise DomainError("a finite-state check needs an explicit grid of distributions")
        grid = conjugate_grid(family, theta, nuisance)
    Lam = lambda lam: limit_log_mgf(family, lam, theta, nuisance)
    rows = []
    for s in grid:
        rows.append((s, cramer_rate(family, s, theta, nuisance), numerical_conjugate(Lam, s)))
    return rows

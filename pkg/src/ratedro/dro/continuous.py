"""Worst cases over the Gaussian ellipsoid ball and the scalar AR interval ball."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import DomainError
from ..rates import ArKind, ar_rate
from .types import Branch, PredictorOutput

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def ellipsoid_linear_worst_case(a, b: float, s, Sigma, r: float) -> PredictorOutput:
    """Maximize ``a @ theta + b`` over ``{0.5 (s-theta)^T Sigma^{-1} (s-theta) <= r}``."""
    a = np.atleast_1d(np.asarray(a, float))
    s = np.atleast_1d(np.asarray(s, float))
    S = np.atleast_2d(np.asarray(Sigma, float))
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise DomainError("Sigma must be symmetric positive definite") from None
    Sa = S @ a
    q = float(a @ Sa)
    if r == 0 or q == 0:
        return PredictorOutput(float(a @ s + b), s.copy())
    theta = s + math.sqrt(2.0 * r) / math.sqrt(q) * Sa
    return PredictorOutput(float(a @ s + b + math.sqrt(2.0 * r * q)), theta)


def _bisect_edge(rate: Callable[[float], float], inside: float, outside: float, r: float, tol: float) -> float:
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if rate(mid) <= r:
            inside = mid
        else:
            outside = mid
    return inside


def ar_ball_interval(s: float, r: float, kind, tol: float = 1e-10):
    """The rate ball ``{theta in [-1, 1] : I(s, theta) <= r}`` as ``(lo, hi)``, or ``None``."""
    kind = ArKind(kind)
    rate = lambda th: ar_rate(s, th, kind)
    # The rate in theta is minimized at the projection of s onto [-1, 1]
    # and is monotone on either side of it.
    center = min(max(s, -1.0), 1.0)
    if rate(center) > r:
        return None
    if r == 0:
        # Rounding makes the rate vanish on a sqrt(eps) neighbourhood; the ball is the center.
        return center, center
    lo = -1.0 if rate(-1.0) <= r else _bisect_edge(rate, center, -1.0, r, tol)
    hi = 1.0 if rate(1.0) <= r else _bisect_edge(rate, center, 1.0, r, tol)
    return lo, hi


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def _grid_max(cost: Callable[[float], float], lo: float, hi: float, n: int = 1001):
    grid = np.linspace(lo, hi, n)
    vals = np.array([cost(t) for t in grid])
    k = int(np.argmax(vals))
    best_t, best_v = float(grid[k]), float(vals[k])
    if hi > lo:
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
        t, v = _golden_max(cost, float(a), float(b))
        if v > best_v:
            best_t, best_v = t, v
    return best_t, best_v


def ar_ball_worst_case(cost: Callable[[float], float], s: float, r: float, kind) -> PredictorOutput:
    """Maximize ``cost(theta)`` over the AR rate ball around the estimate ``s``."""
    interval = ar_ball_interval(float(s), float(r), kind)
    if interval is None:
        t, v = _grid_max(cost, -1.0, 1.0)
        return PredictorOutput(v, np.array([t]), Branch.BALL_EMPTY)
    lo, hi = interval
    t, v = _grid_max(cost, lo, hi)
    return PredictorOutput(v, np.array([t]), extra={"interval": (lo, hi)})

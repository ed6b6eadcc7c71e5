"""Worst-case expected loss over relative-entropy balls on the simplex.

The primal problem ``max {theta @ l : D(s || theta) <= r}`` has the scalar
convex dual

    min_{alpha >= max(l)}  alpha - exp(-r) * prod_i (alpha - l_i) ** s_i

which :func:`entropy_dual_batch` solves for many instances at once.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.optimize import minimize

from .._rng import bulk_stream, stream
from ..errors import DomainError
from .types import PredictorOutput

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_TOL = 1e-10


def _dual_objective(u: np.ndarray, Lp: np.ndarray, S: np.ndarray, pos: np.ndarray, em1: np.ndarray):
    """Dual objective minus ``max(l)`` at ``alpha = max(l) + u``, with ``Lp = L - max(l) <= 0``.

    Written as ``(u - G) + (1 - exp(-r)) G`` with ``G = prod (u - Lp_i) ** s_i``;
    the first term is evaluated through ``expm1``/``log1p`` so that neither a
    huge ``u`` nor a tiny ``r`` cancels catastrophically.
    """
    safe_u = np.where(u > 0, u, 1.0)[:, None]
    with np.errstate(divide="ignore"):
        expo = np.sum(np.where(pos, S * np.log(np.where(pos, u[:, None] - Lp, 1.0)), 0.0), axis=1)
        rel = np.sum(np.where(pos, S * np.log1p(-Lp / safe_u), 0.0), axis=1)
    G = np.exp(expo)
    gap = np.where(u > 0, -u * np.expm1(rel), -G)
    return gap + em1 * G


def entropy_dual_batch(L, S, r):
    """Solve the entropy-ball dual for each row pair of ``L`` and ``S``.

    Returns ``(values, alphas)``. ``r`` may be a scalar or one radius per row.
    For ``r == 0`` the value is ``S @ l`` and ``alpha`` is ``inf``.
    """
    L = np.atleast_2d(np.asarray(L, float))
    S = np.atleast_2d(np.asarray(S, float))
    L, S = np.broadcast_arrays(L, S)
    n = L.shape[0]
    r = np.broadcast_to(np.asarray(r, float), (n,))
    values = np.sum(S * L, axis=1)
    alphas = np.full(n, np.inf)
    act = np.flatnonzero(r > 0)
    if act.size == 0:
        return values, alphas
    L, S, r = L[act], S[act], r[act]
    pos = S > 0
    em1 = -np.expm1(-r)
    lbar = L.max(axis=1)
    Lp = L - lbar[:, None]
    f = lambda u: _dual_objective(u, Lp, S, pos, em1)

    # Work in u = alpha - lbar. Double the bracket until f(2w) >= f(w); the
    # convex objective then has its minimizer in [0, 2w].
    w = np.ones(act.size)
    f1 = f(w)
    f2 = f(2 * w)
    grow = f2 < f1
    for _ in range(2000):
        if not grow.any():
            break
        w = np.where(grow, 2 * w, w)
        f1 = np.where(grow, f2, f1)
        f2 = np.where(grow, f(2 * w), f2)
        grow = f2 < f1

    lo, hi = np.zeros(act.size), 2 * w
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    g1, g2 = f(x1), f(x2)

    def unfinished():
        width = hi - lo
        return np.any((width > _TOL) & (width > 4e-16 * np.maximum(np.abs(lo), np.abs(hi))))

    while unfinished():
        left = g1 <= g2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = np.where(left, hi - _GOLDEN * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + _GOLDEN * (hi - lo))
        ng1 = np.where(left, np.nan, g2)
        ng2 = np.where(left, g1, np.nan)
        fresh = f(np.where(left, nx1, nx2))
        g1 = np.where(left, fresh, ng1)
        g2 = np.where(left, ng2, fresh)
        x1, x2 = nx1, nx2

    zero = np.zeros(act.size)
    cand_u = np.stack([zero, x1, x2], axis=1)
    cand_f = np.stack([f(zero), g1, g2], axis=1)
    k = np.argmin(cand_f, axis=1)
    rows = np.arange(act.size)
    values[act] = lbar + cand_f[rows, k]
    alphas[act] = lbar + cand_u[rows, k]
    return values, alphas


def _check_simplex(s: np.ndarray) -> None:
    if np.any(s < -1e-9) or abs(s.sum() - 1.0) > 1e-9:
        raise DomainError("s is not on the probability simplex")


def _worst_case_model(l: np.ndarray, s: np.ndarray, alpha: float, value: float) -> np.ndarray:
    if not np.isfinite(alpha):
        return s.copy()
    theta = np.zeros_like(s)
    live = (s > 0) & (alpha - l > 0)
    theta[live] = s[live] * (alpha - value) / (alpha - l[live])
    theta[int(np.argmax(l))] += max(0.0, 1.0 - theta.sum())
    return theta / theta.sum()


def entropy_dro_dual(loss_row, s, r: float) -> PredictorOutput:
    """Worst-case expectation of ``loss_row`` over ``{theta : D(s || theta) <= r}``."""
    l = np.asarray(loss_row, float)
    s = np.asarray(s, float)
    _check_simplex(s)
    if r < 0:
        raise DomainError("radius must be nonnegative")
    v, a = entropy_dual_batch(l[None], s[None], r)
    value = float(v[0])
    return PredictorOutput(value, _worst_case_model(l, s, float(a[0]), value), extra={"alpha": float(a[0])})


def _retract(s, theta, r):
    """Pull ``theta`` toward ``s`` until it satisfies ``D(s || theta) <= r``."""
    theta = np.clip(theta, 0.0, None)
    theta = theta / theta.sum()
    sup = s > 0
    ss = s[sup]

    def div(t):
        x = ss + t * (theta[sup] - ss)
        return math.inf if np.any(x <= 0) else float(ss @ np.log(ss / x))

    if div(1.0) <= r:
        return theta
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if div(mid) <= r:
            lo = mid
        else:
            hi = mid
    return s + lo * (theta - s)


def entropy_primal_oracle(
    loss_row,
    s,
    r: float,
    starts: int = 32,
    screen: int = 1_000_000,
    seed: int = 0,
) -> float:
    """Brute-force lower bound on the entropy-ball worst case (``d <= 6``).

    Runs local SQP ascent from random interior starts and screens uniformly
    sampled simplex points. The SQP works in ``z = log(theta)``, where the
    divergence constraint becomes linear. Every candidate is made exactly
    feasible before it is scored, so the result never exceeds the optimum.
    """
    l = np.asarray(loss_row, float)
    s = np.asarray(s, float)
    d = s.size
    if d > 6:
        raise DomainError("the primal oracle is limited to d <= 6")
    best = float(s @ l)
    if r == 0:
        return best
    rng = stream(seed, d)
    sup = s > 0
    # D(s || theta) <= r  <=>  s @ z >= sum(s log s) - r
    floor = float(np.sum(s[sup] * np.log(s[sup]))) - r
    cons = (
        {"type": "eq", "fun": lambda z: np.exp(z).sum() - 1.0, "jac": lambda z: np.exp(z)},
        {"type": "ineq", "fun": lambda z: s @ z - floor, "jac": lambda z: s},
    )
    bounds = [(-60.0, 0.0)] * d
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for k in range(starts):
            x0 = s if k == 0 else 0.5 * s + 0.5 * rng.dirichlet(np.ones(d))
            x0 = _retract(s, np.maximum(x0, 1e-12), r)
            res = minimize(
                lambda z: -(l @ np.exp(z)),
                np.log(np.maximum(x0, 1e-26)),
                jac=lambda z: -l * np.exp(z),
                method="SLSQP",
                bounds=bounds,
                constraints=cons,
                options={"ftol": 1e-12, "maxiter": 500},
            )
            theta = _retract(s, np.exp(res.x), r)
            best = max(best, float(l @ theta))

    # Coarse single-precision screen of uniform simplex points (normalized
    # exponentials); the best screened point is rescored exactly after
    # retraction.
    s32, l32 = s[sup].astype(np.float32), l.astype(np.float32)
    ent = np.float32(np.sum(s[sup] * np.log(s[sup])))
    top, top_val = None, -np.inf
    bulk = bulk_stream(seed, d, 1)
    done = 0
    while done < screen:
        n = min(200_000, screen - done)
        with np.errstate(divide="ignore", invalid="ignore"):
            E = -np.log(bulk.random((d, n), dtype=np.float32))
            tot = E.sum(axis=0)
            dv = ent - s32 @ np.log(E[sup]) + np.log(tot)
            ok = np.flatnonzero(dv <= r)
        if ok.size:
            vals = (l32 @ E[:, ok]) / tot[ok]
            k = int(np.argmax(vals))
            if vals[k] > top_val:
                top_val, top = vals[k], E[:, ok[k]].astype(float) / float(tot[ok[k]])
        done += n
    if top is not None:
        best = max(best, float(l @ _retract(s, top, r)))
    return best

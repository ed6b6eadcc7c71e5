"""Worst-case expected loss over the moment and Wasserstein ambiguity sets.

Both sets are polytopes in the simplex, so the worst case is a linear
program. The single-instance functions solve that program with the dense
simplex method. :func:`wasserstein_batch` evaluates many instances at once
with an exact greedy rule that exploits the structure of the transport LP.
"""
from __future__ import annotations

import numpy as np

from ..lp import linprog_max
from .types import PredictorOutput


def moment_set_worst_case(loss_row, s_hat, eps: float, J: int) -> PredictorOutput:
    """Maximize ``theta @ l`` subject to ``|E_theta[i^j] - E_s[i^j]| <= eps`` for ``j <= J``."""
    l = np.asarray(loss_row, float)
    s = np.asarray(s_hat, float)
    d = s.size
    powers = np.arange(1, d + 1, dtype=float)[None, :] ** np.arange(1, J + 1)[:, None]
    target = powers @ s
    A_ub = np.vstack([powers, -powers])
    b_ub = np.concatenate([target + eps, -target + eps])
    res = linprog_max(l, A_ub, b_ub, np.ones((1, d)), [1.0])
    theta = res.x / res.x.sum()
    return PredictorOutput(float(l @ theta), theta)


def wasserstein_set_worst_case(loss_row, s_hat, eps: float) -> PredictorOutput:
    """Maximize ``theta @ l`` over the 1-Wasserstein ball of radius ``eps``.

    The ground cost between states ``i`` and ``j`` is ``|i - j|``. Variables
    are ``(theta, gamma)`` with ``gamma`` a transport plan from ``s_hat`` to
    ``theta``.
    """
    l = np.asarray(loss_row, float)
    s = np.asarray(s_hat, float)
    d = s.size
    if eps == 0:
        return PredictorOutput(float(s @ l), s.copy())
    idx = np.arange(d)
    cost = np.abs(idx[:, None] - idx[None, :]).astype(float)
    n = d + d * d
    c = np.concatenate([l, np.zeros(d * d)])
    A_eq = np.zeros((2 * d, n))
    for i in range(d):
        A_eq[i, d + i * d : d + (i + 1) * d] = 1.0  # row sums of gamma equal s
        A_eq[d + i, d + i : n : d] = 1.0  # column sums of gamma equal theta
        A_eq[d + i, i] = -1.0
    b_eq = np.concatenate([s, np.zeros(d)])
    A_ub = np.concatenate([np.zeros(d), cost.ravel()])[None, :]
    res = linprog_max(c, A_ub, [eps], A_eq, b_eq)
    theta = res.x[:d]
    return PredictorOutput(float(l @ theta), theta / theta.sum())


def _hull_segments(l: np.ndarray):
    """Upper concave hull of (transport cost, gain) options for each source state.

    Moving a unit of mass from ``i`` to ``j`` costs ``|i - j|`` and gains
    ``l[j] - l[i]``. Returns arrays (source, cost step, gain step), sorted by
    decreasing gain per unit cost.
    """
    d = l.size
    src, dc, dg, slope = [], [], [], []
    for i in range(d):
        c0, g0 = 0.0, 0.0
        costs = np.abs(np.arange(d) - i).astype(float)
        gains = l - l[i]
        while True:
            ahead = costs > c0
            if not ahead.any():
                break
            sl = np.full(d, -np.inf)
            sl[ahead] = (gains[ahead] - g0) / (costs[ahead] - c0)
            best = sl.max()
            if best <= 0:
                break
            # Among equally steep options take the farthest one.
            j = int(np.flatnonzero(sl == best)[np.argmax(costs[sl == best])])
            src.append(i)
            dc.append(costs[j] - c0)
            dg.append(gains[j] - g0)
            slope.append(best)
            c0, g0 = costs[j], gains[j]
    order = np.argsort(-np.asarray(slope), kind="stable")
    return (
        np.asarray(src, dtype=int)[order],
        np.asarray(dc, float)[order],
        np.asarray(dg, float)[order],
    )


def wasserstein_batch(L, S, eps: float) -> np.ndarray:
    """Wasserstein worst case for every decision row of ``L`` and statistic row of ``S``.

    Returns an array of shape ``(len(S), len(L))``. The transport LP has a
    single budget constraint, so it is a fractional multiple-choice
    knapsack: filling hull segments in order of decreasing slope is exact.
    """
    L = np.atleast_2d(np.asarray(L, float))
    S = np.atleast_2d(np.asarray(S, float))
    base = S @ L.T
    if eps == 0:
        return base
    out = base.copy()
    for x in range(L.shape[0]):
        src, dc, dg = _hull_segments(L[x])
        if src.size == 0:
            continue
        mass = S[:, src]
        need = mass * dc
        spent = np.cumsum(need, axis=1) - need
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.clip((eps - spent) / need, 0.0, 1.0)
        frac[need == 0] = 0.0
        out[:, x] += np.sum(frac * mass * dg, axis=1)
    return out

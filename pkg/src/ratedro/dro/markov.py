"""Worst-case stationary expected loss over a conditional-relative-entropy ball.

The feasible set ``{theta balanced doublet : D_c(s || theta) <= r}`` is not
convex but it is star-shaped around the doublet ``c`` whose transition
matrix equals that of ``s``: the divergence is nondecreasing along every ray
leaving ``c``. The solver is a Frank-Wolfe method with away steps whose
linear oracle maximizes the objective over the balanced polytope cut by the
linearized constraint. Each trial step is pulled back into the ball along
the ray through ``c``, which keeps every iterate feasible.

Optima can sit next to a vertex of the polytope, where the ball is thin in
doublet coordinates. Each Frank-Wolfe result is therefore polished by a
local SQP over transition matrices (softmax-parametrized rows), in which
the ball is convex and such points are regular.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_softmax

from .._rng import stream
from ..errors import DomainError
from ..lp import linprog_max
from .types import Branch, PredictorOutput


def _balanced_polytope(m: int):
    """Equality constraints of the balanced doublet simplex (one balance row is redundant)."""
    A = np.zeros((m, m * m))
    A[0] = 1.0
    for i in range(1, m):
        row = np.zeros((m, m))
        row[i, :] += 1.0
        row[:, i] -= 1.0
        A[i] = row.ravel()
    b = np.zeros(m)
    b[0] = 1.0
    return A, b


def transition_center(s: np.ndarray) -> np.ndarray:
    """Stationary doublet of the transition matrix of ``s`` (self-loops on unvisited rows)."""
    m = s.shape[0]
    rows = s.sum(axis=1)
    P = np.where(rows[:, None] > 0, s / np.where(rows > 0, rows, 1.0)[:, None], np.eye(m))
    # Stationary law of P: least-squares solution of pi (P - I) = 0, sum(pi) = 1.
    A = np.vstack([(P - np.eye(m)).T, np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    return pi[:, None] * P


def random_balanced_doublet(m: int, rng: np.random.Generator) -> np.ndarray:
    P = rng.dirichlet(np.ones(m), size=m)
    w, v = np.linalg.eig(P.T)
    pi = np.real(v[:, np.argmin(np.abs(w - 1.0))])
    pi = np.abs(pi) / np.abs(pi).sum()
    th = pi[:, None] * P
    return th / th.sum()


class _Ball:
    def __init__(self, s: np.ndarray, r: float, center: np.ndarray):
        self.s = s
        self.r = r
        self.c = center
        self.pi_s = s.sum(axis=1)
        self.pos = s > 0
        self.sp = s[self.pos]
        visited = self.pi_s > 0
        self.const = float(np.sum(self.sp * np.log(self.sp))) - float(
            np.sum(self.pi_s[visited] * np.log(self.pi_s[visited]))
        )
        self.visited = visited

    def div(self, thetas: np.ndarray) -> np.ndarray:
        """Conditional relative entropy of ``s`` against each doublet in the stack."""
        tp = thetas[:, self.pos]
        rows = thetas.sum(axis=2)[:, self.visited]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.const - np.log(tp) @ self.sp + np.log(rows) @ self.pi_s[self.visited]
        out = np.where(np.any(tp <= 0, axis=1), np.inf, np.maximum(out, 0.0))
        return out

    def retract(self, points: np.ndarray, steps: int = 60):
        """Largest ``t`` in [0, 1] with ``c + t (p - c)`` inside the ball, per point."""
        lo = np.zeros(len(points))
        hi = np.ones(len(points))
        inside = self.div(points) <= self.r
        lo[inside] = 1.0
        todo = ~inside
        for _ in range(steps):
            if not todo.any():
                break
            mid = 0.5 * (lo + hi)
            ok = self.div(self.c + mid[:, None, None] * (points - self.c)) <= self.r
            lo = np.where(todo & ok, mid, lo)
            hi = np.where(todo & ~ok, mid, hi)
        return lo

    def grad(self, theta: np.ndarray) -> np.ndarray:
        rows = theta.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = -np.where(self.s > 0, self.s / theta, 0.0) + np.where(
                self.pi_s[:, None] > 0, self.pi_s[:, None] / rows, 0.0
            )
        return np.nan_to_num(g, nan=0.0, posinf=1e12, neginf=-1e12)


def _lmo(L: np.ndarray, ball: _Ball, theta: np.ndarray, A_eq, b_eq) -> np.ndarray:
    """Maximize ``<L, v>`` over the balanced polytope cut by the linearized constraint."""
    m = L.shape[0]
    g = ball.grad(theta)
    slack = ball.r - float(ball.div(theta[None])[0]) + float(np.sum(g * theta))
    res = linprog_max(L.ravel(), g.ravel()[None, :], [slack], A_eq, b_eq)
    v = res.x.reshape(m, m)
    return v / v.sum()


def _line_search(L, ball: _Ball, theta, direction, gmax, grid: int = 33):
    """Best retracted point along ``theta + gamma * direction``, gamma in [0, gmax]."""
    lo, hi = 0.0, gmax
    best_val, best = -np.inf, None
    for _ in range(2):
        gammas = np.linspace(lo, hi, grid)
        pts = theta + gammas[:, None, None] * direction
        t = ball.retract(pts)
        cand = ball.c + t[:, None, None] * (pts - ball.c)
        vals = np.einsum("ij,kij->k", L, cand)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best = vals[k], (gammas[k], t[k], cand[k])
        step = (hi - lo) / (grid - 1)
        lo, hi = max(0.0, gammas[k] - step), min(gmax, gammas[k] + step)
    return best_val, best


def _frank_wolfe(L, ball: _Ball, start_atom: np.ndarray, A_eq, b_eq, iters: int, patience: int = 5):
    t0 = ball.retract(start_atom[None])[0]
    # Iterate = sum of weights * atoms; atom 0 is the ball center.
    atoms = [ball.c, start_atom]
    weights = [1.0 - t0, t0]
    theta = ball.c + t0 * (start_atom - ball.c)
    value = float(np.sum(L * theta))
    stalls = 0
    for _ in range(iters):
        v = _lmo(L, ball, theta, A_eq, b_eq)
        d_fw = v - theta
        gap_fw = float(np.sum(L * d_fw))
        live = [k for k, w in enumerate(weights) if w > 1e-12]
        k_away = min(live, key=lambda k: float(np.sum(L * atoms[k])))
        d_away = theta - atoms[k_away]
        gap_away = float(np.sum(L * d_away))
        w_away = weights[k_away]
        if gap_fw >= gap_away or w_away >= 1.0 - 1e-12:
            direction, gmax, away = d_fw, 1.0, False
        else:
            direction, gmax, away = d_away, w_away / (1.0 - w_away), True
        new_val, (gamma, t, cand) = _line_search(L, ball, theta, direction, gmax)
        if new_val <= value + 1e-13 * max(1.0, abs(value)):
            stalls += 1
            if stalls >= patience:
                break
            continue
        stalls = 0
        if away:
            weights = [(1.0 + gamma) * w for w in weights]
            weights[k_away] -= gamma
        else:
            weights = [(1.0 - gamma) * w for w in weights]
            atoms.append(v)
            weights.append(gamma)
        weights = [t * w for w in weights]
        weights[0] += 1.0 - t
        theta, value = cand, float(new_val)
    return value, theta


def _stationary(P: np.ndarray) -> np.ndarray:
    m = P.shape[0]
    A = np.vstack([(P - np.eye(m)).T, np.ones((1, m))])
    b = np.zeros(m + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


def _polish(L, ball: _Ball, theta0: np.ndarray):
    """Local SQP refinement over transition matrices; returns a feasible doublet."""
    m = L.shape[0]
    s = ball.s
    rows = s.sum(axis=1)
    Ps = np.where(rows[:, None] > 0, s / np.where(rows > 0, rows, 1.0)[:, None], np.eye(m))
    sup = Ps > 0
    logPs = np.log(np.where(sup, Ps, 1.0))

    def doublet(z):
        P = np.exp(log_softmax(z.reshape(m, m), axis=1))
        pi = np.clip(_stationary(P), 0.0, None)
        return pi[:, None] * P / pi.sum()

    def budget(z):
        logP = log_softmax(z.reshape(m, m), axis=1)
        return ball.r - float(np.sum(ball.pi_s[:, None] * np.where(sup, Ps * (logPs - logP), 0.0)))

    P0 = theta0 / np.maximum(theta0.sum(axis=1, keepdims=True), 1e-300)
    z0 = np.log(np.maximum(P0, 1e-12)).ravel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(
            lambda z: -float(np.sum(L * doublet(z))),
            z0,
            method="SLSQP",
            constraints=({"type": "ineq", "fun": budget},),
            options={"ftol": 1e-12, "maxiter": 200},
        )
    theta = doublet(res.x)
    t = ball.retract(theta[None])[0]
    theta = ball.c + t * (theta - ball.c)
    return float(np.sum(L * theta)), theta


def markov_ball_worst_case(
    loss_doublet,
    s,
    r: float,
    starts: int = 16,
    iters: int = 500,
    seed: int = 0,
    polish: int = 4,
) -> PredictorOutput:
    """Maximize ``sum(L * theta)`` over balanced doublets with ``D_c(s || theta) <= r``."""
    L = np.asarray(loss_doublet, float)
    s = np.asarray(s, float)
    m = s.shape[0]
    if s.shape != (m, m) or L.shape != (m, m):
        raise DomainError("loss and statistic must both be m x m")
    if np.any(s < -1e-9) or abs(s.sum() - 1.0) > 1e-9:
        raise DomainError("s is not a doublet distribution")
    A_eq, b_eq = _balanced_polytope(m)
    center = transition_center(s)
    ball = _Ball(s, float(r), center)
    if ball.div(center[None])[0] > r:
        res = linprog_max(L.ravel(), None, None, A_eq, b_eq)
        theta = res.x.reshape(m, m)
        return PredictorOutput(float(res.value), theta, Branch.BALL_EMPTY)

    if r == 0:
        # Only doublets with the transition matrix of s are feasible.
        return PredictorOutput(float(np.sum(L * center)), center, extra={"divergence": 0.0})

    rng = stream(seed, m)
    results = [(float(np.sum(L * center)), center)]
    for k in range(starts):
        # The first start heads for the oracle vertex seen from the center.
        atom = _lmo(L, ball, center, A_eq, b_eq) if k == 0 else random_balanced_doublet(m, rng)
        results.append(_frank_wolfe(L, ball, atom, A_eq, b_eq, iters))
    results.sort(key=lambda vt: -vt[0])
    for _, theta in results[:polish]:
        results.append(_polish(L, ball, theta))
    best_val, best = max(results, key=lambda vt: vt[0])
    return PredictorOutput(best_val, best, extra={"divergence": float(ball.div(best[None])[0])})

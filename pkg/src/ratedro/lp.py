"""Dense two-phase simplex method with Bland's anti-cycling rule.

Intended for the small linear programs that arise in the ambiguity-set
solvers (at most a few hundred variables and a few dozen constraints).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleError, UnboundedError

_TOL = 1e-9


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    tab -= np.outer(col_vals, tab[row])


def _run(tab: np.ndarray, basis: list, allowed: int, max_iter: int) -> int:
    """Minimize the objective in the last row over the first ``allowed`` columns."""
    m = tab.shape[0] - 1
    for it in range(max_iter):
        cost = tab[-1, :allowed]
        entering = np.flatnonzero(cost < -_TOL)
        if entering.size == 0:
            return it
        col = int(entering[0])
        column = tab[:m, col]
        ok = column > _TOL
        if not np.any(ok):
            raise UnboundedError("linear program is unbounded")
        ratios = np.full(m, np.inf)
        ratios[ok] = tab[:m, -1][ok] / column[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _TOL * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(tab, row, col)
        basis[row] = col
    raise RuntimeError("simplex iteration limit reached")


def linprog_max(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    max_iter: int = 50_000,
) -> LPResult:
    """Maximize ``c @ x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``."""
    c = np.asarray(c, float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, float))
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, float))
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # Rows: [A_ub | I_slack] and [A_eq | 0], scaled to unit max-norm and
    # flipped so that every right-hand side is nonnegative.
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    scale = np.maximum(np.abs(A[:, :n]).max(axis=1, initial=0.0), np.abs(b))
    scale[scale == 0] = 1.0
    A /= scale[:, None]
    b = b / scale
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    n_struct = n + m_ub
    basis: list = [None] * m
    need_art = []
    for i in range(m):
        if i < m_ub and not neg[i]:
            basis[i] = n + i
        else:
            need_art.append(i)
    n_art = len(need_art)
    ncol = n_struct + n_art
    tab = np.zeros((m + 1, ncol + 1))
    tab[:m, :n_struct] = A
    tab[:m, -1] = b
    for k, i in enumerate(need_art):
        tab[i, n_struct + k] = 1.0
        basis[i] = n_struct + k

    iters = 0
    if n_art:
        tab[-1, n_struct:ncol] = 1.0
        for i in need_art:
            tab[-1] -= tab[i]
        iters += _run(tab, basis, ncol, max_iter)
        if -tab[-1, -1] > 1e-8:
            raise InfeasibleError("linear program is infeasible")
        # Drive zero-level artificials out of the basis; drop redundant rows.
        keep = []
        for i in range(m):
            if basis[i] >= n_struct:
                nz = np.flatnonzero(np.abs(tab[i, :n_struct]) > _TOL)
                if nz.size:
                    _pivot(tab, i, int(nz[0]))
                    basis[i] = int(nz[0])
                    keep.append(i)
            else:
                keep.append(i)
        tab = np.vstack([tab[keep], tab[-1:]])
        basis = [basis[i] for i in keep]
        tab = np.delete(tab, np.s_[n_struct:ncol], axis=1)
        m = len(keep)

    tab[-1, :] = 0.0
    tab[-1, :n] = -c
    for i, j in enumerate(basis):
        if tab[-1, j] != 0.0:
            tab[-1] -= tab[-1, j] * tab[i]
    iters += _run(tab, basis, n_struct, max_iter)

    x = np.zeros(n_struct)
    for i, j in enumerate(basis):
        x[j] = tab[i, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult(x=x, value=float(c @ x), iterations=iters)

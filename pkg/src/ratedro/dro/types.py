"""Data types shared by the worst-case solvers."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..errors import ParameterDomainError
from ..rates import ArKind


class SpecKind(str, enum.Enum):
    EMPIRICAL = "empirical"
    PENALIZED = "penalized"
    ENTROPY = "entropy"
    CONDITIONAL_ENTROPY = "conditional_entropy"
    ELLIPSOID = "ellipsoid"
    AR = "ar"
    MOMENT = "moment"
    WASSERSTEIN = "wasserstein"


class Branch(str, enum.Enum):
    BALL_FEASIBLE = "ball_feasible"
    BALL_EMPTY = "ball_empty"


@dataclass(frozen=True)
class LossTable:
    """Losses ``l(x, i)`` for finitely many decisions ``x`` and states ``i``.

    ``offsets`` adds a constant per decision; it is only used by affine
    costs in the Gaussian case and defaults to zero.
    """

    losses: np.ndarray
    decisions: Tuple = ()
    offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        L = np.array(self.losses, dtype=float)
        if L.ndim == 1:
            L = L[None, :]
        if L.ndim != 2 or L.shape[0] < 1 or L.shape[1] < 1 or not np.all(np.isfinite(L)):
            raise ParameterDomainError("losses must be a finite |X| x d matrix")
        L.setflags(write=False)
        object.__setattr__(self, "losses", L)
        labels = tuple(self.decisions) if len(self.decisions) else tuple(range(1, L.shape[0] + 1))
        if len(labels) != L.shape[0]:
            raise ParameterDomainError("one decision label per loss row is required")
        object.__setattr__(self, "decisions", labels)
        off = np.zeros(L.shape[0]) if self.offsets is None else np.array(self.offsets, dtype=float)
        if off.shape != (L.shape[0],):
            raise ParameterDomainError("offsets must have one entry per decision")
        off.setflags(write=False)
        object.__setattr__(self, "offsets", off)

    @property
    def n_decisions(self) -> int:
        return self.losses.shape[0]

    @property
    def d(self) -> int:
        return self.losses.shape[1]

    def with_shift(self, c: float) -> "LossTable":
        return LossTable(self.losses + c, self.decisions, self.offsets + c)


@dataclass(frozen=True)
class CostFunctionTable:
    """Costs ``c(x, theta)`` given as callables, one per decision (scalar AR case)."""

    costs: Sequence[Callable[[float], float]]
    decisions: Tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if not self.costs:
            raise ParameterDomainError("at least one decision is required")
        labels = tuple(self.decisions) if len(self.decisions) else tuple(range(1, len(self.costs) + 1))
        object.__setattr__(self, "decisions", labels)

    @property
    def n_decisions(self) -> int:
        return len(self.costs)


@dataclass(frozen=True)
class AmbiguitySpec:
    """A rate-function ball or baseline ambiguity set.

    ``radius`` is ``r`` for rate balls and ``epsilon`` for the baselines.
    ``sigma`` is the covariance of an ellipsoid ball, ``ar_kind`` selects
    the AR estimator and ``moments`` is ``J`` for the moment set.
    """

    kind: SpecKind
    radius: float = 0.0
    sigma: Optional[np.ndarray] = None
    ar_kind: Optional[ArKind] = None
    moments: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", SpecKind(self.kind))
        if not (np.isfinite(self.radius) and self.radius >= 0):
            raise ParameterDomainError("radius must be a finite nonnegative number")
        object.__setattr__(self, "radius", float(self.radius))
        if self.kind is SpecKind.MOMENT and int(self.moments) < 1:
            raise ParameterDomainError("the moment set needs J >= 1")
        if self.kind is SpecKind.AR:
            if self.ar_kind is None:
                raise ParameterDomainError("an AR ball needs ar_kind")
            object.__setattr__(self, "ar_kind", ArKind(self.ar_kind))
        if self.kind is SpecKind.ELLIPSOID:
            if self.sigma is None:
                raise ParameterDomainError("an ellipsoid ball needs sigma")
            S = np.atleast_2d(np.array(self.sigma, dtype=float))
            S.setflags(write=False)
            object.__setattr__(self, "sigma", S)

    @property
    def label(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class PredictorOutput:
    value: float
    worst_case_model: Optional[np.ndarray] = None
    branch: Branch = Branch.BALL_FEASIBLE
    extra: dict = field(default_factory=dict, compare=False)

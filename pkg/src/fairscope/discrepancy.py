"""Query and result types shared by the discrepancy solvers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfusionSet
from .errors import DomainError


@dataclass(frozen=True)
class DiscrepancyQuery:
    """Trade-off ``beta`` between unfairness (1) and error (0), solved to tolerance ``gamma``."""

    beta: float
    gamma: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"beta must lie in [0, 1], got {self.beta}")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class DiscrepancySolution:
    """A witness confusion set and baseline together with its discrepancy.

    ``value`` is beta * unfairness_part + (1 - beta) * error_part for the
    witness. For exact solvers it is within gamma of the true minimum; for the
    multiclass search it is an upper bound and ``lower`` holds a certified
    lower bound.
    """

    beta: float
    value: float
    unfairness_part: float
    error_part: float
    baseline: np.ndarray
    witness: ConfusionSet
    lower: float
    exact: bool

    @property
    def baseline_offdiag(self) -> tuple[float, float]:
        """Binary baseline as (false positive rate, false negative rate)."""
        return float(self.baseline[0, 1]), float(self.baseline[1, 0])

    @property
    def witness_alpha0(self) -> np.ndarray:
        """Binary witness false positive rates per group."""
        return self.witness.matrices[:, 0, 1]

    def as_dict(self) -> dict:
        return {
            "beta": self.beta,
            "value": self.value,
            "lower": self.lower,
            "exact": self.exact,
            "unfairness_part": self.unfairness_part,
            "error_part": self.error_part,
            "baseline": self.baseline.tolist(),
            "witness": self.witness.matrices.tolist(),
        }


def disc(beta: float, unfairness: float, error: float) -> float:
    return beta * unfairness + (1.0 - beta) * error

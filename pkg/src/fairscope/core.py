"""Domain types and elementary quantities for aggregate fairness audits.

A population is split into groups. Each group carries a weight, a vector of
true label proportions and a vector of predicted label proportions. When the
per-group confusion matrices are known they are bundled into a ConfusionSet.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .errors import (
    EmptyGroupList,
    InputError,
    NonSimplexVector,
    NotBinary,
    RowStochasticViolation,
    WeightSumMismatch,
)

SIMPLEX_TOL = 1e-9
PRED_CROSSCHECK_TOL = 1e-6
WEIGHT_RENORM_TOL = 1e-6


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_simplex(vec: np.ndarray, what: str, tol: float = SIMPLEX_TOL) -> np.ndarray:
    if vec.ndim != 1 or not np.all(np.isfinite(vec)):
        raise NonSimplexVector(f"{what} must be a finite 1-d vector")
    if np.any(vec < -tol):
        raise NonSimplexVector(f"{what} has a negative entry: {vec.tolist()}")
    if abs(vec.sum() - 1.0) > tol:
        raise NonSimplexVector(f"{what} sums to {vec.sum():.12g}, not 1")
    return np.clip(vec, 0.0, None)


@dataclass(frozen=True)
class LabelSpace:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise InputError(f"need at least 2 labels, got {self.k}")


@dataclass(frozen=True)
class GroupStats:
    group_id: Hashable
    weight: float
    true_props: np.ndarray
    pred_props: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "true_props", _frozen(self.true_props))
        object.__setattr__(self, "pred_props", _frozen(self.pred_props))
        object.__setattr__(self, "weight", float(self.weight))

    @property
    def k(self) -> int:
        return len(self.true_props)


@dataclass(frozen=True)
class AggregateInputs:
    labels: LabelSpace
    groups: tuple[GroupStats, ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def k(self) -> int:
        return self.labels.k

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def weights(self) -> np.ndarray:
        return np.array([g.weight for g in self.groups])

    @property
    def true(self) -> np.ndarray:
        """(G, k) array of true label proportions."""
        return np.array([g.true_props for g in self.groups])

    @property
    def pred(self) -> np.ndarray:
        return np.array([g.pred_props for g in self.groups])

    @property
    def group_ids(self) -> list:
        return [g.group_id for g in self.groups]

    @classmethod
    def from_arrays(cls, weights, true_props, pred_props, group_ids: Sequence | None = None) -> "AggregateInputs":
        true_props = np.asarray(true_props, dtype=float)
        pred_props = np.asarray(pred_props, dtype=float)
        if true_props.ndim != 2 or true_props.shape != pred_props.shape:
            raise InputError("true_props and pred_props must be (G, k) arrays of equal shape")
        n = true_props.shape[0]
        if group_ids is None:
            group_ids = list(range(n))
        groups = [GroupStats(gid, w, t, p) for gid, w, t, p in zip(group_ids, weights, true_props, pred_props)]
        if len(groups) != n or len(list(weights)) != n:
            raise InputError("weights, group ids and proportion rows must have the same length")
        raw = cls(LabelSpace(true_props.shape[1]) if n else LabelSpace(2), tuple(groups))
        return validate_inputs(raw)

    @classmethod
    def binary(cls, weights, pi1, p1, group_ids: Sequence | None = None) -> "AggregateInputs":
        """Build two-label inputs from positive-label rates only."""
        pi1 = np.asarray(pi1, dtype=float)
        p1 = np.asarray(p1, dtype=float)
        return cls.from_arrays(weights, np.column_stack([1 - pi1, pi1]), np.column_stack([1 - p1, p1]), group_ids)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Row-stochastic matrix; entry [y, z] is P(prediction z | true label y)."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise RowStochasticViolation(f"confusion matrix must be square k x k with k >= 2, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < -SIMPLEX_TOL):
            raise RowStochasticViolation("confusion matrix has negative or non-finite entries")
        sums = a.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > SIMPLEX_TOL):
            raise RowStochasticViolation(f"confusion rows sum to {sums.tolist()}")
        object.__setattr__(self, "entries", _frozen(np.clip(a, 0.0, None)))

    @property
    def k(self) -> int:
        return self.entries.shape[0]


BaselineMatrix = ConfusionMatrix


@dataclass(frozen=True)
class ConfusionSet:
    labels: LabelSpace
    per_group: tuple[tuple[GroupStats, ConfusionMatrix], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_group", tuple(self.per_group))

    @property
    def k(self) -> int:
        return self.labels.k

    @property
    def n_groups(self) -> int:
        return len(self.per_group)

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weight for s, _ in self.per_group])

    @property
    def true(self) -> np.ndarray:
        return np.array([s.true_props for s, _ in self.per_group])

    @property
    def pred(self) -> np.ndarray:
        return np.array([s.pred_props for s, _ in self.per_group])

    @property
    def matrices(self) -> np.ndarray:
        """(G, k, k) stack of confusion matrices."""
        return np.array([m.entries for _, m in self.per_group])

    def inputs(self) -> AggregateInputs:
        return AggregateInputs(self.labels, tuple(s for s, _ in self.per_group))

    @classmethod
    def from_arrays(cls, weights, true_props, matrices, pred_props=None, group_ids: Sequence | None = None) -> "ConfusionSet":
        true_props = np.asarray(true_props, dtype=float)
        mats = [ConfusionMatrix(m) for m in np.asarray(matrices, dtype=float)]
        n, k = true_props.shape
        if len(mats) != n or any(m.k != k for m in mats):
            raise InputError("need one k x k matrix per group")
        implied = np.array([m.entries.T @ t for m, t in zip(mats, true_props)])
        if pred_props is None:
            pred_props = implied
        else:
            pred_props = np.asarray(pred_props, dtype=float)
            gap = np.abs(pred_props - implied).max()
            if gap > PRED_CROSSCHECK_TOL:
                raise InputError(f"supplied predicted proportions differ from the implied ones by {gap:.3g}")
        inputs = AggregateInputs.from_arrays(weights, true_props, pred_props, group_ids)
        return cls(inputs.labels, tuple(zip(inputs.groups, mats)))


def validate_inputs(raw: AggregateInputs) -> AggregateInputs:
    """Check simplex and weight invariants; renormalize weights with a small drift."""
    if len(raw.groups) == 0:
        raise EmptyGroupList("at least one group is required")
    k = raw.labels.k
    ids = [g.group_id for g in raw.groups]
    if len(set(ids)) != len(ids):
        raise InputError(f"group ids must be distinct: {ids}")
    weights = np.array([g.weight for g in raw.groups], dtype=float)
    if not np.all(np.isfinite(weights)) or np.any(weights < 0) or np.any(weights > 1):
        raise WeightSumMismatch(f"weights must lie in [0, 1]: {weights.tolist()}")
    total = weights.sum()
    if abs(total - 1.0) > WEIGHT_RENORM_TOL:
        raise WeightSumMismatch(f"weights sum to {total:.12g}")
    if abs(total - 1.0) > SIMPLEX_TOL:
        weights = weights / total
    groups = []
    for g, w in zip(raw.groups, weights):
        if g.k != k or len(g.pred_props) != k:
            raise NonSimplexVector(f"group {g.group_id!r}: expected vectors of length {k}")
        t = _check_simplex(np.asarray(g.true_props), f"true_props of group {g.group_id!r}")
        p = _check_simplex(np.asarray(g.pred_props), f"pred_props of group {g.group_id!r}")
        if w == g.weight and np.array_equal(t, g.true_props) and np.array_equal(p, g.pred_props):
            groups.append(g)
        else:
            groups.append(GroupStats(g.group_id, w, t, p))
    return AggregateInputs(raw.labels, tuple(groups))


def error_of(cs: ConfusionSet) -> float:
    diag = np.einsum("gyy->gy", cs.matrices)
    value = 1.0 - float(np.sum(cs.weights[:, None] * cs.true * diag))
    return min(max(value, 0.0), 1.0)


def implied_pred_props(stats: GroupStats, A: ConfusionMatrix) -> np.ndarray:
    return A.entries.T @ stats.true_props


def is_fair(cs: ConfusionSet, tol: float = 0.0) -> bool:
    """True when all positive-weight groups share their confusion rows.

    A row is compared between two groups only when both put positive mass on
    that true label.
    """
    mats = cs.matrices
    active = [g for g in range(cs.n_groups) if cs.weights[g] > 0]
    true = cs.true
    for i, g in enumerate(active):
        for h in active[i + 1:]:
            rows = (true[g] > 0) & (true[h] > 0)
            if np.any(rows) and np.abs(mats[g][rows] - mats[h][rows]).max() > tol:
                return False
    return True


class Onesided(enum.Enum):
    ALL_PRED_GE = "AllPredGE"
    ALL_PRED_LE = "AllPredLE"
    MIXED = "Mixed"


@dataclass(frozen=True)
class OnesidedCondition:
    kind: Onesided
    equality: bool = False


def condition_onesided(inputs: AggregateInputs) -> OnesidedCondition:
    """Classify whether predicted positive rates sit on one side of the true rates."""
    if inputs.k != 2:
        raise NotBinary(f"condition_onesided needs 2 labels, got {inputs.k}")
    pi1 = inputs.true[:, 1]
    p1 = inputs.pred[:, 1]
    if np.all(p1 <= pi1):
        return OnesidedCondition(Onesided.ALL_PRED_LE, bool(np.all(p1 == pi1)))
    if np.all(p1 >= pi1):
        return OnesidedCondition(Onesided.ALL_PRED_GE)
    return OnesidedCondition(Onesided.MIXED)

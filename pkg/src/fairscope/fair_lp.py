"""Linear programs over confusion matrices consistent with aggregate inputs.

A matrix A is consistent with a group when its rows are distributions and
``A.T @ true_props == pred_props``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AggregateInputs, ConfusionMatrix
from .errors import InconsistentGroup
from .lp import LinearProgram, LpStatus, solve


@dataclass(frozen=True)
class FairErrorResult:
    feasible: bool
    min_error: float | None = None
    witness: ConfusionMatrix | None = None


def _consistency_rows(k: int, true_props: np.ndarray) -> np.ndarray:
    """Rows of the map vec(A) -> A.T @ true_props (A flattened row-major)."""
    M = np.zeros((k, k * k))
    for z in range(k):
        for y in range(k):
            M[z, y * k + z] = true_props[y]
    return M


def _row_sum_rows(k: int) -> np.ndarray:
    return np.kron(np.eye(k), np.ones(k))


def fair_error_lower_bound(inputs: AggregateInputs, margin: float = 0.0, method: str = "simplex") -> FairErrorResult:
    """Smallest error of a classifier that uses one confusion matrix for every group.

    With ``margin > 0`` each predicted proportion may deviate by up to margin.
    Groups with zero weight impose no constraint.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    k = inputs.k
    w = inputs.weights
    active = np.flatnonzero(w > 0)
    true, pred = inputs.true, inputs.pred
    pbar = w @ true
    c = -np.array([pbar[y] if y == z else 0.0 for y in range(k) for z in range(k)])
    A_eq = [_row_sum_rows(k)]
    b_eq = [np.ones(k)]
    A_ub, b_ub = [], []
    for g in active:
        M = _consistency_rows(k, true[g])
        if margin == 0:
            A_eq.append(M)
            b_eq.append(pred[g])
        else:
            A_ub += [M, -M]
            b_ub += [pred[g] + margin, -(pred[g] - margin)]
    lp = LinearProgram(
        c,
        np.vstack(A_eq),
        np.concatenate(b_eq),
        np.vstack(A_ub) if A_ub else None,
        np.concatenate(b_ub) if b_ub else None,
        np.zeros(k * k),
        np.ones(k * k),
    )
    sol = solve(lp, method=method)
    if sol.status is LpStatus.INFEASIBLE:
        return FairErrorResult(False)
    A = np.clip(sol.x.reshape(k, k), 0.0, 1.0)
    A = A / A.sum(axis=1, keepdims=True)
    return FairErrorResult(True, float(min(max(1.0 + sol.objective_value, 0.0), 1.0)), ConfusionMatrix(A))


def _group_lp(k: int, true_props, pred_props, objective) -> np.ndarray | None:
    lp = LinearProgram(
        objective,
        np.vstack([_row_sum_rows(k), _consistency_rows(k, true_props)]),
        np.concatenate([np.ones(k), pred_props]),
        lo=np.zeros(k * k),
        hi=np.ones(k * k),
    )
    sol = solve(lp)
    if not sol.optimal:
        return None
    return sol.x.reshape(k, k)


def group_min_error(inputs: AggregateInputs) -> tuple[float, np.ndarray]:
    """Minimum error over per-group consistent matrices, and the minimizing matrices.

    This is the smallest error any classifier with these aggregates can have,
    fair or not.
    """
    k = inputs.k
    mats = np.zeros((inputs.n_groups, k, k))
    total = 0.0
    for g, s in enumerate(inputs.groups):
        obj = -np.array([s.true_props[y] if y == z else 0.0 for y in range(k) for z in range(k)])
        A = _group_lp(k, s.true_props, s.pred_props, obj)
        if A is None:
            raise InconsistentGroup(f"group {s.group_id!r} admits no consistent confusion matrix")
        mats[g] = A
        total += s.weight * (1.0 - float(np.sum(s.true_props * np.diag(A))))
    return max(total, 0.0), mats


def diagonal_ranges(inputs: AggregateInputs) -> tuple[np.ndarray, np.ndarray]:
    """Per group and label, the range of P(correct | label) over consistent matrices.

    Returns (lo, hi), each of shape (G, k).
    """
    k = inputs.k
    lo = np.zeros((inputs.n_groups, k))
    hi = np.ones((inputs.n_groups, k))
    for g, s in enumerate(inputs.groups):
        for y in range(k):
            if s.true_props[y] == 0:
                continue
            e = np.zeros(k * k)
            e[y * k + y] = 1.0
            A_min = _group_lp(k, s.true_props, s.pred_props, e)
            A_max = _group_lp(k, s.true_props, s.pred_props, -e)
            if A_min is None or A_max is None:
                raise InconsistentGroup(f"group {s.group_id!r} admits no consistent confusion matrix")
            lo[g, y] = np.clip(A_min[y, y], 0.0, 1.0)
            hi[g, y] = np.clip(A_max[y, y], 0.0, 1.0)
    return lo, hi

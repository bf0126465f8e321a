"""Unfairness of a classifier whose per-group confusion matrices are known.

Unfairness is the smallest population fraction whose predictions have to be
attributed to group-specific nuisance behaviour when every group is modelled
as a mixture of one shared baseline matrix and its own nuisance rows. For a
true label y and baseline row ``r`` the cost is

    objective_y(r) = sum_g w_g * pi_g[y] * max_z eta(r[z], A_g[y, z])

and unfairness is the sum over y of the minimum over rows. With two labels the
minimum is found exactly on a finite candidate set. With more labels we report
a lower bound and an upper bound (greedy initialization refined by sequential
linear programming).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfusionMatrix, ConfusionSet, GroupStats
from .errors import LpFailure, NotBinary, NumericalFailure
from .lp import LinearProgram, solve
from .scalarfuncs import eta

CLAMP_EPS = 1e-5
SHRINK = 0.5
MAX_HALVINGS = 30


@dataclass(frozen=True)
class UnfairnessResult:
    lower: float
    upper: float
    baseline_witness: ConfusionMatrix
    per_label: tuple[tuple[float, float], ...]
    per_group_eta: np.ndarray

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


@dataclass(frozen=True)
class LabelMapping:
    """maps[y][z] is the label that prediction z becomes when the true label is y."""

    maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        k = len(self.maps)
        maps = tuple(tuple(int(v) for v in row) for row in self.maps)
        if any(len(row) != k or any(not 0 <= v < k for v in row) for row in maps):
            raise ValueError("each per-label map must send 0..k-1 into 0..k-1")
        object.__setattr__(self, "maps", maps)

    @classmethod
    def identity(cls, k: int) -> "LabelMapping":
        return cls(tuple(tuple(range(k)) for _ in range(k)))

    @classmethod
    def correct_vs_mistake(cls, k: int) -> "LabelMapping":
        """Column 0 collects correct predictions, column 1 all mistakes."""
        return cls(tuple(tuple(0 if z == y else 1 for z in range(k)) for y in range(k)))


def _label_weights(cs: ConfusionSet, y: int) -> np.ndarray:
    return cs.weights * cs.true[:, y]


def objective_y(baseline_row, cs: ConfusionSet, y: int) -> float:
    row = np.asarray(baseline_row, dtype=float)
    c = _label_weights(cs, y)
    rows = cs.matrices[:, y, :]
    return float(np.sum(c * np.max(eta(row[None, :], rows), axis=1)))


def per_group_eta(baseline: np.ndarray, cs: ConfusionSet) -> np.ndarray:
    """(G, k) array of max_z eta(baseline[y, z], A_g[y, z])."""
    return np.max(eta(np.asarray(baseline)[None, :, :], cs.matrices), axis=2)


def _binary_min(c: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    """Minimize sum_g c_g eta(x, vals_g) over x in [0, 1]; smallest argmin wins ties."""
    active = c > 0
    c, vals = c[active], vals[active]
    if c.size == 0:
        return 0.0, 0.0
    cands = np.unique(np.concatenate([[0.0, 1.0], vals]))
    obj = (c[None, :] * eta(cands[:, None], vals[None, :])).sum(axis=1)
    i = int(np.argmin(obj))
    return float(cands[i]), float(obj[i])


def unfairness_binary_exact(cs: ConfusionSet) -> UnfairnessResult:
    if cs.k != 2:
        raise NotBinary(f"exact unfairness needs 2 labels, got {cs.k}")
    mats = cs.matrices
    base = np.zeros((2, 2))
    per_label = []
    for y in (0, 1):
        x, val = _binary_min(_label_weights(cs, y), mats[:, y, y])
        base[y, y] = x
        base[y, 1 - y] = 1.0 - x
        per_label.append((val, val))
    total = sum(v for v, _ in per_label)
    return UnfairnessResult(total, total, ConfusionMatrix(base), tuple(per_label), per_group_eta(base, cs))


def unfairness_multiclass_lower(cs: ConfusionSet) -> np.ndarray:
    """Per-label lower bounds: max over columns z of the one-coordinate minimum."""
    mats = cs.matrices
    out = np.zeros(cs.k)
    for y in range(cs.k):
        c = _label_weights(cs, y)
        out[y] = max(_binary_min(c, mats[:, y, z])[1] for z in range(cs.k))
    return out


def _split_candidates(gamma: float, v: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Points in [0, gamma] where sum_g max(v_g, eta(a, b_g), eta(gamma - a, t_g)) can bend."""
    pts = [np.array([0.0, gamma]), b, gamma - t]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 1.0 - v
        ok = s > 0
        for num in (b / s, 1.0 - (1.0 - b) / s):
            pts.append(num[ok])
        for u in (t / s, 1.0 - (1.0 - t) / s):
            pts.append((gamma - u)[ok])
        # eta(a, b) == eta(gamma - a, t) on each pair of branches
        branch = [
            (b * gamma, b + t),
            (b * (1.0 - gamma), 1.0 - t - b),
            ((1.0 - b) * gamma - t, 1.0 - b - t),
            ((1.0 - t) - (1.0 - b) * (1.0 - gamma), 2.0 - b - t),
        ]
        for num, den in branch:
            nz = den != 0
            pts.append(num[nz] / den[nz])
    allp = np.concatenate(pts)
    allp = allp[np.isfinite(allp)]
    allp = allp[(allp >= 0) & (allp <= gamma)]
    return np.unique(allp)


def greedy_baseline(cs: ConfusionSet, y: int, ordering, trace: list | None = None) -> np.ndarray:
    """Build a baseline row for label y one coordinate at a time.

    The first step treats every wrong prediction as one merged label and is
    solved exactly. Each later step splits the merged mass between the next
    label in ``ordering`` and the remainder. If ``trace`` is given, the
    objective value after each step is appended to it.
    """
    k = cs.k
    ordering = [int(z) for z in ordering]
    if sorted(ordering) != [z for z in range(k) if z != y]:
        raise ValueError("ordering must be a permutation of the labels other than y")
    c = _label_weights(cs, y)
    active = c > 0
    rows = cs.matrices[active][:, y, :]
    c = c[active]
    row = np.zeros(k)
    if c.size == 0:
        row[y] = 1.0
        return row
    x, val = _binary_min(c, rows[:, y])
    row[y] = x
    gamma = 1.0 - x
    row[ordering[0]] = gamma
    v = eta(np.full(len(c), x), rows[:, y])
    if trace is not None:
        trace.append(val)
    for i in range(len(ordering) - 1):
        zi, rest = ordering[i], ordering[i + 1:]
        b = rows[:, zi]
        t = np.clip(rows[:, rest].sum(axis=1), 0.0, 1.0)
        cands = _split_candidates(gamma, v, b, t)
        a = cands[:, None]
        terms = np.maximum(v[None, :], np.maximum(eta(a, b[None, :]), eta(np.clip(gamma - a, 0.0, 1.0), t[None, :])))
        obj = (terms * c[None, :]).sum(axis=1)
        j = int(np.argmin(obj))
        a_best = float(cands[j])
        row[zi] = a_best
        row[ordering[i + 1]] = max(gamma - a_best, 0.0)
        v = np.maximum(v, eta(np.full(len(c), a_best), b))
        gamma = row[ordering[i + 1]]
        if trace is not None:
            trace.append(float(obj[j]))
    return row


def greedy_baseline_multi(cs: ConfusionSet, y: int, n_orderings: int = 10, seed: int | np.random.Generator = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    others = np.array([z for z in range(cs.k) if z != y])
    best, best_val = None, np.inf
    for _ in range(n_orderings):
        row = greedy_baseline(cs, y, rng.permutation(others))
        val = objective_y(row, cs, y)
        if val < best_val:
            best, best_val = row, val
    return best


def weighted_average_row(cs: ConfusionSet, y: int) -> np.ndarray:
    """Naive baseline: mass-weighted mean of the groups' rows for label y."""
    c = _label_weights(cs, y)
    if c.sum() <= 0:
        row = np.zeros(cs.k)
        row[y] = 1.0
        return row
    return (c[:, None] * cs.matrices[:, y, :]).sum(axis=0) / c.sum()


def _clamp_rows(rows: np.ndarray, eps: float) -> np.ndarray:
    out = np.clip(rows, eps, 1.0 - eps)
    return out / out.sum(axis=-1, keepdims=True)


def local_minimize_row(init, cs: ConfusionSet, y: int, max_iter: int = 100, eps_stop: float = 1e-7,
                       eps: float = CLAMP_EPS, lp_method: str = "simplex") -> np.ndarray:
    """Sequential linear programming on one baseline row.

    Each step linearizes eta around the current row (confusion entries are
    clamped to [eps, 1-eps] for the linearization only), solves an LP over
    the row and per-group epigraph variables, and backtracks along the LP
    direction until the true objective strictly decreases.
    """
    init = np.asarray(init, dtype=float)
    c = _label_weights(cs, y)
    active = c > 0
    if not np.any(active):
        return init.copy()
    k = cs.k
    w = c[active]
    H = _clamp_rows(cs.matrices[active][:, y, :], eps)
    G = len(w)

    def true_obj(row):
        return objective_y(row, cs, y)

    start_val = true_obj(init)
    cur = _clamp_rows(init, eps)
    cur_val = true_obj(cur)
    # variables: row (k), epigraph c_g (G)
    obj = np.concatenate([np.zeros(k), w])
    A_eq = np.concatenate([np.ones(k), np.zeros(G)])[None, :]
    lo = np.concatenate([np.full(k, eps), np.zeros(G)])
    hi = np.concatenate([np.full(k, 1.0 - eps), np.ones(G)])
    for _ in range(max_iter):
        # eta is the larger of two concave branches; their tangents over-estimate it,
        # so the LP model is a majorizer and is not flat at kinks
        a, b = cur[None, :], H
        branches = (
            (1.0 - b / a, b / a**2),
            (1.0 - (1.0 - b) / (1.0 - a), -(1.0 - b) / (1.0 - a) ** 2),
        )
        rows, rhs = [], []
        for val, jac in branches:
            for g in range(G):
                for z in range(k):
                    r = np.zeros(k + G)
                    r[z] = jac[g, z]
                    r[k + g] = -1.0
                    rows.append(r)
                    rhs.append(jac[g, z] * cur[z] - val[g, z])
        A_ub, b_ub = np.array(rows), np.array(rhs)
        try:
            sol = solve(LinearProgram(obj, A_eq, [1.0], A_ub, b_ub, lo, hi), method=lp_method)
        except (NumericalFailure, LpFailure):
            break
        if not sol.optimal:
            break
        e = sol.x[:k] - cur
        if np.linalg.norm(e) < eps_stop:
            break
        mu = 1.0
        for _ in range(MAX_HALVINGS):
            trial = cur + mu * e
            trial_val = true_obj(trial)
            if trial_val < cur_val:
                break
            mu *= SHRINK
        else:
            break
        cur, cur_val = trial, trial_val
    if cur_val <= start_val:
        return cur
    return init.copy()


def _two_column_support(cs: ConfusionSet, y: int) -> list[int] | None:
    c = _label_weights(cs, y)
    rows = cs.matrices[c > 0][:, y, :]
    cols = np.flatnonzero(rows.max(axis=0) > 0) if rows.size else np.array([], dtype=int)
    return list(cols) if len(cols) <= 2 else None


def unfairness_multiclass_bounds(cs: ConfusionSet, n_orderings: int = 10, max_iter: int = 100,
                                 eps_stop: float = 1e-7, seed: int = 0, refine: bool = True) -> UnfairnessResult:
    """Lower and upper bounds on unfairness; exact when k = 2.

    Labels whose rows are supported on at most two prediction columns in every
    group are solved exactly on those columns.
    """
    if cs.k == 2:
        return unfairness_binary_exact(cs)
    k = cs.k
    lower = unfairness_multiclass_lower(cs)
    rng = np.random.default_rng(seed)
    base = np.zeros((k, k))
    per_label = []
    for y in range(k):
        support = _two_column_support(cs, y)
        row = np.zeros(k)
        if support is not None and len(support) <= 1:
            row[support[0] if support else y] = 1.0
        elif support is not None:
            z0, z1 = support
            x, _ = _binary_min(_label_weights(cs, y), cs.matrices[:, y, z0])
            row[z0], row[z1] = x, 1.0 - x
        else:
            row = greedy_baseline_multi(cs, y, n_orderings, rng)
            if refine:
                row = local_minimize_row(row, cs, y, max_iter, eps_stop)
        base[y] = row
        up = objective_y(row, cs, y)
        lo = up if support is not None else min(float(lower[y]), up)
        per_label.append((lo, up))
    etas = per_group_eta(base, cs)
    upper = float(np.sum(cs.weights[:, None] * cs.true * etas))
    low = float(sum(lo for lo, _ in per_label))
    return UnfairnessResult(min(low, upper), upper, ConfusionMatrix(base), tuple(per_label), etas)


def apply_label_mapping(cs: ConfusionSet, f: LabelMapping) -> ConfusionSet:
    k = cs.k
    if len(f.maps) != k:
        raise ValueError(f"mapping is defined for {len(f.maps)} labels, set has {k}")
    out = []
    for stats, m in cs.per_group:
        A = np.zeros((k, k))
        for y in range(k):
            np.add.at(A[y], list(f.maps[y]), m.entries[y])
        mapped = ConfusionMatrix(A)
        out.append((GroupStats(stats.group_id, stats.weight, stats.true_props, A.T @ stats.true_props), mapped))
    return ConfusionSet(cs.labels, tuple(out))

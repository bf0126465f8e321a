"""Bounds on the minimum discrepancy for any number of labels.

The upper bound comes from a local search over a baseline matrix and one
confusion matrix per group, all kept consistent with the aggregate inputs.
Each step linearizes both smooth branches of eta, solves an LP inside a box
trust region and backtracks on the true objective.

The lower bound relaxes the problem to the diagonal of each confusion matrix:
only P(correct | label) is compared against the baseline, and each diagonal
entry may range independently over its consistent interval. Each label then
reduces to a one-dimensional concave-piecewise problem solved exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import AggregateInputs, ConfusionSet, error_of
from .discrepancy import DiscrepancyQuery, DiscrepancySolution, disc
from .errors import InfeasibleInputs, LpFailure, NumericalFailure
from .fair_lp import diagonal_ranges, fair_error_lower_bound, group_min_error
from .lp import LinearProgram, LpStatus, solve
from .mindisc_binary import mindisc_binary
from .scalarfuncs import eta_unchecked
from .unfairness import objective_y, unfairness_multiclass_bounds


@dataclass(frozen=True)
class SlpParams:
    max_iter: int = 100
    eps_stop: float = 1e-7
    trust_radius: float = 0.1
    prune_threshold: float = -1.0
    clamp_eps: float = 1e-5
    lp_method: str = "auto"
    max_halvings: int = 30

    def __post_init__(self):
        if self.max_iter <= 0 or self.eps_stop <= 0 or self.trust_radius <= 0 or self.clamp_eps <= 0:
            raise ValueError("max_iter, eps_stop, trust_radius and clamp_eps must be positive")
        if self.prune_threshold > 0:
            raise ValueError("prune_threshold must be <= 0")


@dataclass
class SlpState:
    """alpha[y] is the baseline row for label y; H[y, g] is group g's row for label y."""

    alpha: np.ndarray
    H: np.ndarray
    c: np.ndarray = field(default=None)
    objective: float = float("nan")

    @classmethod
    def from_matrices(cls, matrices: np.ndarray, weights: np.ndarray, true: np.ndarray) -> "SlpState":
        """Start from per-group matrices (G, k, k); the baseline is their mass-weighted mean."""
        mats = np.asarray(matrices, dtype=float)
        H = np.transpose(mats, (1, 0, 2)).copy()
        wt = (weights[:, None] * true).T  # (k, G)
        alpha = np.empty(H.shape[::2])
        for y in range(H.shape[0]):
            s = wt[y].sum()
            alpha[y] = (wt[y] @ H[y]) / s if s > 0 else np.full(H.shape[2], 1.0 / H.shape[2])
        return cls(alpha, H)


class _Slp:
    def __init__(self, inputs: AggregateInputs, beta: float, params: SlpParams):
        self.inputs, self.beta, self.params = inputs, beta, params
        k = inputs.k
        self.k = k
        self.active = np.flatnonzero(inputs.weights > 0)
        self.G = self.active.size
        self.true = inputs.true[self.active]
        self.pred = inputs.pred[self.active]
        self.wt = (inputs.weights[self.active][:, None] * self.true).T  # (k, G)
        eps = params.clamp_eps
        self.eps = eps
        self.scale = 1.0 - k * eps
        self.pred_adj = self.scale * self.pred + eps
        self.n_alpha = k * k
        self.n_H = k * self.G * k
        self.n = self.n_alpha + self.n_H + k * self.G
        self._build_static()

    # variable indices
    def ia(self, y, z):
        return y * self.k + z

    def ih(self, y, g, z):
        return self.n_alpha + (y * self.G + g) * self.k + z

    def ic(self, y, g):
        return self.n_alpha + self.n_H + y * self.G + g

    def _build_static(self):
        k, G = self.k, self.G
        rows, rhs = [], []
        for y in range(k):
            r = np.zeros(self.n)
            r[[self.ia(y, z) for z in range(k)]] = 1.0
            rows.append(r)
            rhs.append(1.0)
            for g in range(G):
                r = np.zeros(self.n)
                r[[self.ih(y, g, z) for z in range(k)]] = 1.0
                rows.append(r)
                rhs.append(1.0)
        for g in range(G):
            for z in range(k):
                r = np.zeros(self.n)
                for y in range(k):
                    r[self.ih(y, g, z)] = self.true[g, y]
                rows.append(r)
                rhs.append(self.pred_adj[g, z])
        self.A_eq = np.array(rows)
        self.b_eq = np.array(rhs)
        obj = np.zeros(self.n)
        for y in range(k):
            for g in range(G):
                obj[self.ic(y, g)] = self.beta * self.wt[y, g]
                obj[self.ih(y, g, y)] = -(1.0 - self.beta) * self.wt[y, g]
        self.obj = obj
        self.obj_const = (1.0 - self.beta) * self.wt.sum()

    def pack(self, alpha, H, c):
        return np.concatenate([alpha.ravel(), H.ravel(), c.ravel()])

    def unpack(self, x):
        k, G = self.k, self.G
        alpha = x[: self.n_alpha].reshape(k, k)
        H = x[self.n_alpha: self.n_alpha + self.n_H].reshape(k, G, k)
        c = x[self.n_alpha + self.n_H:].reshape(k, G)
        return alpha, H, c

    def etas(self, alpha, H):
        """(k, G) array of max_z eta(alpha[y, z], H[y, g, z])."""
        a = np.clip(alpha, 0.0, 1.0)[:, None, :]
        return eta_unchecked(a, np.clip(H, 0.0, 1.0)).max(axis=2)

    def true_objective(self, alpha, H) -> float:
        diag = np.einsum("ygy->yg", H)
        return float(self.beta * np.sum(self.wt * self.etas(alpha, H)) + (1 - self.beta) * np.sum(self.wt * (1 - diag)))

    def method(self) -> str:
        return "highs" if self.params.lp_method == "auto" else self.params.lp_method

    def step_lp(self, alpha, H) -> LinearProgram:
        k, G, p = self.k, self.G, self.params
        a = alpha[:, None, :]
        h = H
        e1 = 1.0 - h / a
        e2 = 1.0 - (1.0 - h) / (1.0 - a)
        da1, dh1 = h / a**2, -1.0 / a + 0 * h
        da2, dh2 = -(1.0 - h) / (1.0 - a) ** 2, 1.0 / (1.0 - a) + 0 * h
        rows, rhs = [], []
        for y in range(k):
            for g in range(G):
                if self.wt[y, g] <= 0:
                    continue
                for z in range(k):
                    for ev, da, dh in ((e1, da1, dh1), (e2, da2, dh2)):
                        v = ev[y, g, z]
                        if v < p.prune_threshold:
                            continue
                        r = np.zeros(self.n)
                        r[self.ia(y, z)] = da[y, g, z]
                        r[self.ih(y, g, z)] = dh[y, g, z]
                        r[self.ic(y, g)] = -1.0
                        rows.append(r)
                        rhs.append(da[y, g, z] * alpha[y, z] + dh[y, g, z] * H[y, g, z] - v)
        x = self.pack(alpha, H, np.zeros((k, G)))
        lo = np.full(self.n, self.eps)
        hi = np.full(self.n, 1.0 - self.eps)
        nb = self.n_alpha + self.n_H
        lo[:nb] = np.maximum(self.eps, x[:nb] - p.trust_radius)
        hi[:nb] = np.minimum(1.0 - self.eps, x[:nb] + p.trust_radius)
        lo[:nb] = np.minimum(lo[:nb], x[:nb])
        hi[:nb] = np.maximum(hi[:nb], x[:nb])
        lo[nb:] = 0.0
        hi[nb:] = 1.0
        return LinearProgram(self.obj, self.A_eq, self.b_eq, np.array(rows) if rows else None,
                             np.array(rhs) if rhs else None, lo, hi)

    def to_original(self, H) -> np.ndarray:
        """Undo the target adjustment: per-group matrices (G, k, k) consistent with the raw inputs."""
        A = (np.transpose(H, (1, 0, 2)) - self.eps) / self.scale
        A = np.clip(A, 0.0, None)
        return A / A.sum(axis=2, keepdims=True)

    def adjust(self, matrices: np.ndarray) -> np.ndarray:
        """Map raw consistent matrices (G, k, k) into the adjusted box; returns H (k, G, k)."""
        return np.transpose(self.scale * matrices + self.eps, (1, 0, 2))


def _full_witness(inputs: AggregateInputs, slp: _Slp, A_active: np.ndarray) -> ConfusionSet:
    k = inputs.k
    mats = np.empty((inputs.n_groups, k, k))
    for g, s in enumerate(inputs.groups):
        mats[g] = np.tile(s.pred_props, (k, 1))
    mats[slp.active] = A_active
    return ConfusionSet.from_arrays(inputs.weights, inputs.true, mats, None, inputs.group_ids)


def _auto_inits(inputs: AggregateInputs, slp: _Slp) -> list[np.ndarray]:
    """Starting points: the best shared matrix if one exists, the error minimizer, and rank-one rows."""
    starts = []
    fair = fair_error_lower_bound(inputs, 0.0)
    if fair.feasible:
        starts.append(np.repeat(fair.witness.entries[None], slp.G, axis=0))
    starts.append(group_min_error(inputs)[1][slp.active])
    starts.append(np.array([np.tile(p, (inputs.k, 1)) for p in slp.pred]))
    return starts


def _run_slp(slp: _Slp, inputs: AggregateInputs, start: np.ndarray):
    """One local search from per-group matrices; returns (value, U, error, witness, baseline)."""
    params, beta = slp.params, slp.beta
    H = slp.adjust(start)
    gap = np.abs(np.einsum("gy,ygz->gz", slp.true, H) - slp.pred_adj).max() if slp.G else 0.0
    if gap > 1e-6:
        raise InfeasibleInputs(f"initial matrices miss the predicted proportions by {gap:.3g}")
    alpha = SlpState.from_matrices(np.transpose(H, (1, 0, 2)), inputs.weights[slp.active], slp.true).alpha
    cur = slp.true_objective(alpha, H)

    def reported(alpha, H):
        cs = _full_witness(inputs, slp, slp.to_original(H))
        err = error_of(cs)
        best_u, best_base = np.inf, None
        # the search runs in shifted coordinates, so try the baseline both as is and shifted back
        for cand in (alpha, (alpha - slp.eps) / slp.scale):
            base = np.clip(cand, 0.0, None)
            base = base / base.sum(axis=1, keepdims=True)
            U = sum(objective_y(base[y], cs, y) for y in range(inputs.k))
            if U < best_u:
                best_u, best_base = U, base
        return disc(beta, best_u, err), best_u, err, cs, best_base

    best = reported(alpha, H)
    if beta == 0:
        return best
    for _ in range(params.max_iter):
        try:
            sol = solve(slp.step_lp(alpha, H), method=slp.method())
        except (NumericalFailure, LpFailure):
            break
        if sol.status is not LpStatus.OPTIMAL:
            break
        na, nH, _ = slp.unpack(sol.x)
        da, dH = na - alpha, nH - H
        if np.sqrt(np.sum(da**2) + np.sum(dH**2)) < params.eps_stop:
            break
        mu = 1.0
        for _ in range(params.max_halvings):
            ta, tH = alpha + mu * da, H + mu * dH
            tv = slp.true_objective(ta, tH)
            if tv < cur:
                break
            mu *= 0.5
        else:
            break
        alpha, H, cur = ta, tH, tv
        rep = reported(alpha, H)
        if rep[0] < best[0]:
            best = rep
    return best


def mindisc_multiclass_upper(inputs: AggregateInputs, beta: float, params: SlpParams | None = None,
                             init: str | np.ndarray | ConfusionSet = "auto", seed: int = 0,
                             polish: bool = True) -> DiscrepancySolution:
    """Upper bound on the minimum discrepancy with a consistent witness.

    ``init`` may be "auto" (several starts, best kept), a ConfusionSet
    consistent with the inputs, or per-group matrices of shape (G, k, k).
    The reported value is beta * U + (1 - beta) * error of the witness, where
    U is an upper bound on the witness's unfairness.
    """
    params = params or SlpParams()
    DiscrepancyQuery(beta)
    slp = _Slp(inputs, beta, params)
    if isinstance(init, str):
        if init != "auto":
            raise ValueError(f"unknown init {init!r}")
        starts = _auto_inits(inputs, slp)
    elif isinstance(init, ConfusionSet):
        starts = [init.matrices[slp.active]]
    else:
        start = np.asarray(init, dtype=float)
        starts = [start[slp.active] if start.shape[0] == inputs.n_groups else start]
    value, U, err, cs, base = min((_run_slp(slp, inputs, s) for s in starts), key=lambda r: r[0])
    if polish and U > 0:
        refined = unfairness_multiclass_bounds(cs, seed=seed)
        if refined.upper < U:
            U, base = refined.upper, refined.baseline_witness.entries.copy()
            value = disc(beta, U, err)
    return DiscrepancySolution(beta, value, U, err, base, cs, 0.0, False)


def _relaxed_label_min(wt: np.ndarray, lo: np.ndarray, hi: np.ndarray, beta: float) -> float:
    """min over b of sum_g wt_g * min over d in [lo_g, hi_g] of beta*eta(b, d) + (1-beta)*(1-d)."""
    active = wt > 0
    wt, lo, hi = wt[active], lo[active], hi[active]
    if wt.size == 0:
        return 0.0
    b = np.unique(np.concatenate([[0.0, 1.0], lo, hi]))[:, None]
    best = np.full((b.shape[0], wt.size), np.inf)
    for d in (np.broadcast_to(lo, best.shape), np.broadcast_to(hi, best.shape), np.clip(b, lo, hi)):
        val = beta * eta_unchecked(np.broadcast_to(b, best.shape), d) + (1 - beta) * (1 - d)
        best = np.minimum(best, val)
    return float((best @ wt).min())


def mindisc_multiclass_lower(inputs: AggregateInputs, beta: float, gamma: float = 1e-6) -> float:
    """Certified lower bound on the minimum discrepancy.

    Two labels are solved exactly. Otherwise the bound is the larger of the
    diagonal relaxation at ``beta`` and ``beta * U1 + (1 - beta) * E0``, where
    U1 is the relaxation at beta = 1 and E0 the exact minimum error.
    """
    DiscrepancyQuery(beta, gamma)
    if inputs.k == 2:
        return mindisc_binary(inputs, DiscrepancyQuery(beta, gamma)).lower
    lo, hi = diagonal_ranges(inputs)
    wt = inputs.weights[:, None] * inputs.true  # (G, k)

    def relaxed(b):
        return sum(_relaxed_label_min(wt[:, y], lo[:, y], hi[:, y], b) for y in range(inputs.k))

    e0, _ = group_min_error(inputs)
    bound = relaxed(beta)
    if beta < 1:
        bound = max(bound, beta * relaxed(1.0) + (1 - beta) * e0)
    return max(bound - 1e-12, 0.0)


def mindisc_multiclass(inputs: AggregateInputs, beta: float, params: SlpParams | None = None,
                       gamma: float = 1e-6, seed: int = 0, init="auto") -> DiscrepancySolution:
    """Upper-bound witness with its certified lower bound attached."""
    if inputs.k == 2:
        return mindisc_binary(inputs, DiscrepancyQuery(beta, gamma))
    up = mindisc_multiclass_upper(inputs, beta, params, init=init, seed=seed)
    low = min(mindisc_multiclass_lower(inputs, beta, gamma), up.value)
    return DiscrepancySolution(up.beta, up.value, up.unfairness_part, up.error_part, up.baseline, up.witness, low, False)

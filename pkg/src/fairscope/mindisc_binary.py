"""Exact minimum discrepancy for two labels from aggregate inputs.

For two labels each group's confusion matrix has one free parameter: its
false positive rate ``x``. The false negative rate then follows from the
group's true and predicted positive rates as ``r + q * x``. Given a baseline
(false positive rate ``b0``, false negative rate ``b1``) the best ``x`` for a
group lies in a set of at most four points, so the discrepancy of the best
witness is a cheap function F of the baseline. The minimum of F is attained
either on a finite grid of baseline pairs or on one of the lines
``b1 = r_g + q_g * b0``; each line is searched with a Lipschitz-bounded
branch-and-bound over a partition on which every term is smooth.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import AggregateInputs, ConfusionSet, GroupStats, error_of
from .discrepancy import DiscrepancyQuery, DiscrepancySolution, disc
from .errors import DomainError, HypothesisViolation, InconsistentGroup, NotBinary
from .scalarfuncs import AffinePair, eta_unchecked, psi_deriv_bound
from .unfairness import unfairness_binary_exact

NEG_ONLY, POS_ONLY, MIXED = 0, 1, 2
_TOL = 1e-12
_LEAF_POINTS = 256
_MAX_GRID_POINTS = 10_000_000


@dataclass(frozen=True)
class GroupDerived:
    r: float
    q: float
    lo: float
    hi: float
    in_G1: bool
    in_Gplus: bool

    @property
    def dom(self) -> tuple[float, float]:
        return self.lo, self.hi

    def alpha1(self, alpha0: float) -> float:
        if not self.in_G1:
            return 0.0
        return min(max(self.r + self.q * alpha0, 0.0), 1.0)


def derive_group(stats: GroupStats) -> GroupDerived:
    """Line parameters and feasible false-positive-rate interval of one group."""
    if stats.k != 2:
        raise NotBinary(f"expected 2 labels, got {stats.k}")
    pi0, pi1 = (float(v) for v in stats.true_props)
    p1 = float(stats.pred_props[1])
    if pi1 == 0:
        return GroupDerived(0.0, 0.0, p1, p1, False, False)
    if pi0 == 0:
        r = 1.0 - p1
        if not -_TOL <= r <= 1 + _TOL:
            raise InconsistentGroup(f"group {stats.group_id!r} has no consistent confusion matrix")
        return GroupDerived(r, 0.0, 0.0, 1.0, True, False)
    r = 1.0 - p1 / pi1
    q = pi0 / pi1
    # same interval as [max(-r/q, 0), min((1-r)/q, 1)], written without cancellation
    lo = max((p1 - pi1) / pi0, 0.0)
    hi = min(p1 / pi0, 1.0)
    if lo > hi + _TOL:
        raise InconsistentGroup(f"group {stats.group_id!r} has an empty feasible interval")
    return GroupDerived(r, q, lo, max(lo, hi), True, True)


def _tau_off(beta, base, x):
    """Per-individual blend on an off-diagonal rate: beta * eta + (1 - beta) * mistake rate."""
    return beta * eta_unchecked(base, x) + (1.0 - beta) * x


def D_beta_g(baseline, alpha0_g: float, d: GroupDerived, stats: GroupStats, beta: float) -> float:
    """Discrepancy contribution of one group, per unit of its weight."""
    b0, b1 = (float(v) for v in baseline)
    if not (d.lo - _TOL <= alpha0_g <= d.hi + _TOL):
        raise DomainError(f"alpha0 {alpha0_g} outside the feasible interval {d.dom}")
    pi0, pi1 = (float(v) for v in stats.true_props)
    x0 = np.float64(min(max(alpha0_g, 0.0), 1.0))
    total = 0.0
    if pi0 > 0:
        total += pi0 * _tau_off(beta, np.float64(b0), x0)
    if pi1 > 0:
        total += pi1 * _tau_off(beta, np.float64(b1), np.float64(d.alpha1(alpha0_g)))
    return float(total)


def candidate_set_S(baseline, d: GroupDerived) -> np.ndarray:
    """Finite set of false positive rates containing a minimizer of D_beta_g."""
    if not d.in_G1:
        return np.array([d.lo])
    if not d.in_Gplus:
        return np.array([d.lo])
    b0, b1 = (float(v) for v in baseline)
    pts = np.array([d.lo, d.hi, b0, (b1 - d.r) / d.q])
    pts = pts[(pts >= d.lo - _TOL) & (pts <= d.hi + _TOL)]
    return np.unique(np.clip(pts, d.lo, d.hi))


class _Problem:
    """Vectorized evaluation of F over many baselines; zero-weight groups are dropped."""

    def __init__(self, inputs: AggregateInputs):
        if inputs.k != 2:
            raise NotBinary(f"expected 2 labels, got {inputs.k}")
        self.inputs = inputs
        self.derived = [derive_group(s) for s in inputs.groups]
        active = [i for i, s in enumerate(inputs.groups) if s.weight > 0]
        self.active = np.array(active, dtype=int)
        t = inputs.true[self.active]
        self.w = inputs.weights[self.active]
        self.pi0, self.pi1 = t[:, 0], t[:, 1]
        self.p1 = inputs.pred[self.active, 1]
        ds = [self.derived[i] for i in active]
        self.r = np.array([d.r for d in ds])
        self.q = np.array([d.q for d in ds])
        self.lo = np.array([d.lo for d in ds])
        self.hi = np.array([d.hi for d in ds])
        self.kind = np.array([MIXED if d.in_Gplus else (POS_ONLY if d.in_G1 else NEG_ONLY) for d in ds])

    def candidates(self, b0: np.ndarray, b1: np.ndarray):
        """Candidate false positive rates, shape (N, G, 4), with a validity mask."""
        n, G = b0.size, self.w.size
        X = np.empty((n, G, 4))
        X[:, :, 0] = self.lo
        X[:, :, 1] = self.hi
        X[:, :, 2] = b0[:, None]
        mixed = self.kind == MIXED
        qs = np.where(mixed, self.q, 1.0)
        X[:, :, 3] = (b1[:, None] - self.r) / qs
        valid = (X >= self.lo[None, :, None] - _TOL) & (X <= self.hi[None, :, None] + _TOL)
        valid[:, ~mixed, 1:] = False
        valid[:, :, 0] = True
        X = np.clip(X, self.lo[None, :, None], self.hi[None, :, None])
        return X, valid

    def D(self, b0: np.ndarray, b1: np.ndarray, X: np.ndarray, beta: float) -> np.ndarray:
        A0 = np.broadcast_to(b0[:, None, None], X.shape)
        A1 = np.broadcast_to(b1[:, None, None], X.shape)
        X1 = np.clip(self.r[None, :, None] + self.q[None, :, None] * X, 0.0, 1.0)
        kind = self.kind[None, :, None]
        X1 = np.where(kind == POS_ONLY, (1.0 - self.p1)[None, :, None], X1)
        t0 = _tau_off(beta, A0, X)
        t1 = _tau_off(beta, A1, X1)
        pi0, pi1 = self.pi0[None, :, None], self.pi1[None, :, None]
        return np.where(pi0 > 0, pi0 * t0, 0.0) + np.where(pi1 > 0, pi1 * t1, 0.0)

    def group_min(self, b0, b1, beta):
        b0 = np.atleast_1d(np.asarray(b0, dtype=float))
        b1 = np.atleast_1d(np.asarray(b1, dtype=float))
        X, valid = self.candidates(b0, b1)
        Dv = np.where(valid, self.D(b0, b1, X, beta), np.inf)
        return Dv, X

    def F(self, b0, b1, beta) -> np.ndarray:
        Dv, _ = self.group_min(b0, b1, beta)
        return Dv.min(axis=2) @ self.w

    def F_chunked(self, b0: np.ndarray, b1: np.ndarray, beta: float, chunk: int = 65536) -> np.ndarray:
        out = np.empty(b0.size)
        for s in range(0, b0.size, chunk):
            out[s:s + chunk] = self.F(b0[s:s + chunk], b1[s:s + chunk], beta)
        return out

    def best_x(self, b0: float, b1: float, beta: float) -> np.ndarray:
        """Per active group, the smallest false positive rate attaining the group minimum."""
        Dv, X = self.group_min(b0, b1, beta)
        Dv, X = Dv[0], X[0]
        best = Dv.min(axis=1, keepdims=True)
        Xm = np.where(Dv <= best + 1e-15, X, np.inf)
        return Xm.min(axis=1)


def F(baseline, inputs: AggregateInputs, beta: float) -> float:
    """Smallest discrepancy among witnesses measured against one fixed baseline."""
    prob = _Problem(inputs)
    b0, b1 = (float(v) for v in baseline)
    return float(prob.F(np.array([b0]), np.array([b1]), beta)[0])


def v_candidate_sets(inputs: AggregateInputs) -> tuple[np.ndarray, np.ndarray]:
    prob = _Problem(inputs)
    return _v_sets(prob)


def _v_sets(prob: _Problem):
    V0 = [0.0, 1.0]
    V1 = [0.0, 1.0]
    for i in range(prob.w.size):
        if prob.kind[i] == MIXED:
            V0 += [prob.lo[i], prob.hi[i]]
            V1 += [max(prob.r[i], 0.0), min(prob.r[i] + prob.q[i], 1.0)]
        elif prob.kind[i] == POS_ONLY:
            V1.append(1.0 - prob.p1[i])
        else:
            V0.append(prob.p1[i])
    return np.unique(np.clip(V0, 0, 1)), np.unique(np.clip(V1, 0, 1))


class _Line:
    """The terms of H along the line b1 = r_g + q_g * b0, as affine pairs in v = b0.

    Arrays have shape (G, 4, 2): group, candidate slot, label. Each entry
    describes eta(a + b v, c + d v) with weight wt, plus error slope d.
    """

    def __init__(self, prob: _Problem, g: int, beta: float):
        self.prob, self.g, self.beta = prob, g, beta
        G = prob.w.size
        rg, qg = prob.r[g], prob.q[g]
        self.a = np.zeros((G, 4, 2))
        self.b = np.zeros((G, 4, 2))
        self.c = np.zeros((G, 4, 2))
        self.d = np.zeros((G, 4, 2))
        self.wt = np.zeros((G, 4, 2))
        self.present = np.zeros((G, 4), dtype=bool)
        self.x0c = np.zeros((G, 4))
        self.x0d = np.zeros((G, 4))
        self.a[:, :, 1], self.b[:, :, 0], self.b[:, :, 1] = rg, 1.0, qg
        for z in range(G):
            w = prob.w[z]
            if prob.kind[z] == MIXED:
                rz, qz = prob.r[z], prob.q[z]
                slots = [(prob.lo[z], 0.0), (prob.hi[z], 0.0), (0.0, 1.0), ((rg - rz) / qz, qg / qz)]
                for s, (c0, d0) in enumerate(slots):
                    self.present[z, s] = True
                    self.x0c[z, s], self.x0d[z, s] = c0, d0
                    self.c[z, s, 0], self.d[z, s, 0] = c0, d0
                    self.c[z, s, 1], self.d[z, s, 1] = rz + qz * c0, qz * d0
                    self.wt[z, s] = w * prob.pi0[z], w * prob.pi1[z]
            elif prob.kind[z] == NEG_ONLY:
                self.present[z, 0] = True
                self.x0c[z, 0] = prob.p1[z]
                self.c[z, 0, 0] = prob.p1[z]
                self.wt[z, 0, 0] = w
            else:
                self.present[z, 0] = True
                self.c[z, 0, 1] = 1.0 - prob.p1[z]
                self.wt[z, 0, 1] = w
        self.lo, self.hi = prob.lo[g], prob.hi[g]

    def breakpoints(self) -> np.ndarray:
        """Every v where some term changes its smooth form or a candidate enters or leaves."""
        m = (self.wt > 0) & self.present[:, :, None]
        a, b, c, d = self.a[m], self.b[m], self.c[m], self.d[m]
        pts = [np.array([self.lo, self.hi])]
        with np.errstate(divide="ignore", invalid="ignore"):
            pts.append((c - a) / (b - d))
            for k in (0.0, 1.0):
                pts.append((k - a) / b)
                pts.append((k - c) / d)
            mixed = (self.prob.kind == MIXED)[:, None] & self.present
            slope = self.x0d[mixed]
            for bound in (self.prob.lo, self.prob.hi):
                edge = np.broadcast_to(bound[:, None], self.x0c.shape)[mixed]
                pts.append((edge - self.x0c[mixed]) / slope)
        allp = np.concatenate(pts)
        allp = allp[np.isfinite(allp) & (allp >= self.lo) & (allp <= self.hi)]
        return np.unique(allp)

    def piece(self, l: float, u: float) -> "_Piece":
        return _Piece(self, l, u)

    def H(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        g = self.g
        b1 = np.clip(self.prob.r[g] + self.prob.q[g] * v, 0.0, 1.0)
        return self.prob.F_chunked(v, b1, self.beta)


class _Piece:
    """One interval of the partition: every term has a fixed smooth form on it."""

    def __init__(self, line: _Line, l: float, u: float):
        self.line = line
        m = 0.5 * (l + u)
        prob = line.prob
        x0 = line.x0c + line.x0d * m
        valid = line.present.copy()
        mixed = prob.kind == MIXED
        inside = (x0 >= prob.lo[:, None] - _TOL) & (x0 <= prob.hi[:, None] + _TOL)
        valid[mixed] &= inside[mixed]
        self.valid = valid
        a, b, c, d = line.a, line.b, line.c, line.d
        same = (np.abs(a - c) <= 1e-15) & (np.abs(b - d) <= 1e-15)
        diff = (a + b * m) - (c + d * m)
        self.branch = np.where(same, 0, np.where(diff > 0, 1, 2))
        self.num = np.where(self.branch == 1, np.abs(b * c - a * d), np.abs(d * (1 - a) - b * (1 - c)))
        self.slope_cap = self._slope_bounds(m)

    def _slope_bounds(self, m: float) -> np.ndarray:
        line = self.line
        out = np.full(line.a.shape, np.inf)
        it = np.ndindex(*line.a.shape)
        for idx in it:
            if not self.valid[idx[:2]] or line.wt[idx] == 0:
                continue
            if self.branch[idx] == 0:
                out[idx] = 0.0
                continue
            pair = AffinePair(*(float(arr[idx]) for arr in (line.a, line.b, line.c, line.d)))
            try:
                out[idx] = psi_deriv_bound(pair, 1.0, pair.side_of(m))
            except HypothesisViolation:
                pass
        return out

    def lipschitz(self, l: float, u: float) -> float:
        line = self.line
        a, b = line.a, line.b
        with np.errstate(divide="ignore", invalid="ignore"):
            den1 = np.minimum(a + b * l, a + b * u)
            den2 = np.minimum(1 - a - b * l, 1 - a - b * u)
            den = np.where(self.branch == 1, den1, den2)
            interval = np.where(self.num <= 1e-300, 0.0, np.where(den > 0, self.num / den**2, np.inf))
            eb = np.where(self.branch == 0, 0.0, np.minimum(interval, self.slope_cap))
            beta = line.beta
            term = np.where(line.wt > 0, line.wt * (beta * eb + (1 - beta) * line.d), 0.0)
        slot = np.where(self.valid, term.sum(axis=2), 0.0)
        return float(slot.max(axis=1).sum())


def argmin_1d(g: int, inputs: AggregateInputs, beta: float, gamma: float) -> tuple[float, float]:
    """Minimize F along the line of group g to within gamma; returns (v, H(v))."""
    prob = _Problem(inputs)
    pos = np.flatnonzero(prob.active == g)
    if pos.size == 0 or prob.kind[pos[0]] != MIXED:
        raise ValueError(f"group {g} has zero weight or a degenerate label distribution")
    return _argmin_1d(prob, int(pos[0]), beta, gamma)


def _argmin_1d(prob: _Problem, g: int, beta: float, gamma: float) -> tuple[float, float]:
    line = _Line(prob, g, beta)
    bps = line.breakpoints()
    Hb = line.H(bps)
    order = np.lexsort((bps, Hb))
    best_v, best = float(bps[order[0]]), float(Hb[order[0]])

    def consider(vs, hs):
        nonlocal best_v, best
        i = int(np.lexsort((vs, hs))[0])
        if hs[i] < best - 1e-15 or (abs(hs[i] - best) <= 1e-15 and vs[i] < best_v):
            best_v, best = float(vs[i]), float(hs[i])

    heap = []
    counter = 0

    def push(piece, l, u, hl, hu):
        nonlocal counter
        L = piece.lipschitz(l, u)
        lb = 0.5 * (hl + hu - L * (u - l)) if math.isfinite(L) else -math.inf
        heapq.heappush(heap, (lb, counter, piece, l, u, hl, hu, L))
        counter += 1

    for i in range(len(bps) - 1):
        l, u = float(bps[i]), float(bps[i + 1])
        if u - l <= 0:
            continue
        push(line.piece(l, u), l, u, float(Hb[i]), float(Hb[i + 1]))
    evaluated = 0
    while heap:
        lb, _, piece, l, u, hl, hu, L = heapq.heappop(heap)
        if lb >= best - gamma:
            break
        if u - l < 1e-13:
            continue
        n = math.ceil(L * (u - l) / gamma) if math.isfinite(L) else math.inf
        if n <= _LEAF_POINTS:
            vs = np.linspace(l, u, int(n) + 2)[1:-1]
            if vs.size:
                consider(vs, line.H(vs))
                evaluated += vs.size
            continue
        if evaluated > _MAX_GRID_POINTS:
            raise HypothesisViolation("one-dimensional search exceeded its evaluation budget")
        mid = 0.5 * (l + u)
        hm = float(line.H(np.array([mid]))[0])
        evaluated += 1
        consider(np.array([mid]), np.array([hm]))
        push(piece, l, mid, hl, hm)
        push(piece, mid, u, hm, hu)
    return best_v, best


def mindisc0_closed_form(inputs: AggregateInputs) -> float:
    if inputs.k != 2:
        raise NotBinary(f"expected 2 labels, got {inputs.k}")
    return float(inputs.weights @ np.abs(inputs.true[:, 1] - inputs.pred[:, 1]))


def _witness(inputs: AggregateInputs, derived, alpha0: np.ndarray) -> ConfusionSet:
    mats = []
    for d, x in zip(derived, alpha0):
        x1 = d.alpha1(x)
        mats.append([[1.0 - x, x], [x1, 1.0 - x1]])
    return ConfusionSet.from_arrays(inputs.weights, inputs.true, mats, inputs.pred, inputs.group_ids)


def _search_baseline(prob: _Problem, beta: float, gamma: float) -> tuple[float, float, float]:
    V0, V1 = _v_sets(prob)
    g0, g1 = np.meshgrid(V0, V1, indexing="ij")
    g0, g1 = g0.ravel(), g1.ravel()
    vals = prob.F_chunked(g0, g1, beta)
    cands = [(float(v), float(a), float(b), -1) for v, a, b in zip(vals, g0, g1)]
    for i in range(prob.w.size):
        if prob.kind[i] == MIXED:
            v, h = _argmin_1d(prob, i, beta, gamma)
            cands.append((h, v, float(min(max(prob.r[i] + prob.q[i] * v, 0.0), 1.0)), i))
    best = min(c[0] for c in cands)
    ties = [c for c in cands if c[0] <= best + 1e-15]
    ties.sort(key=lambda c: (c[1], c[2], c[3]))
    val, b0, b1, _ = ties[0]
    return b0, b1, val


def mindisc_binary(inputs: AggregateInputs, query: DiscrepancyQuery | float) -> DiscrepancySolution:
    """Minimum of beta * unfairness + (1 - beta) * error over consistent confusion sets.

    The reported value is the discrepancy of the returned witness, which is
    within ``gamma`` above the true minimum.
    """
    if not isinstance(query, DiscrepancyQuery):
        query = DiscrepancyQuery(float(query))
    beta, gamma = query.beta, query.gamma
    prob = _Problem(inputs)
    derived = prob.derived
    alpha0 = np.array([d.lo for d in derived])
    if beta > 0:
        b0, b1, _ = _search_baseline(prob, beta, gamma)
        alpha0[prob.active] = prob.best_x(b0, b1, beta)
    witness = _witness(inputs, derived, alpha0)
    unf = unfairness_binary_exact(witness)
    err = error_of(witness)
    value = disc(beta, unf.upper, err)
    lower = value if beta == 0 else max(value - gamma, 0.0)
    return DiscrepancySolution(beta, value, unf.upper, err, unf.baseline_witness.entries.copy(), witness, lower, True)

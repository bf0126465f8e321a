"""End-to-end audit procedures built on the discrepancy solvers.

Every routine here works from aggregate inputs only. Two labels use the exact
solver; more labels use the local-search upper bound with its certified lower
bound attached.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .core import AggregateInputs
from .discrepancy import DiscrepancyQuery, DiscrepancySolution, disc
from .errors import InfeasibleCap
from .fair_lp import FairErrorResult, fair_error_lower_bound
from .mindisc_binary import mindisc_binary
from .mindisc_multiclass import SlpParams, mindisc_multiclass
from .parallel import pmap

__all__ = [
    "FairErrorResult",
    "fair_error_lower_bound",
    "solve_discrepancy",
    "ParetoPoint",
    "ParetoCurve",
    "pareto_curve",
    "CapBound",
    "bound_under_error_cap",
    "bound_under_unfairness_cap",
    "BetaInterval",
    "beta_sensitivity",
]

BETA_TOL = 1e-3
SWEEP_STEP = 0.01


def solve_discrepancy(inputs: AggregateInputs, beta: float, gamma: float = 1e-6, seed: int = 0,
                      params: SlpParams | None = None) -> DiscrepancySolution:
    if inputs.k == 2:
        return mindisc_binary(inputs, DiscrepancyQuery(beta, gamma))
    return mindisc_multiclass(inputs, beta, params, gamma=gamma, seed=seed)


def _solve_at(beta: float, inputs: AggregateInputs, gamma: float, seed: int) -> DiscrepancySolution:
    return solve_discrepancy(inputs, float(beta), gamma, seed)


def _solve_many(inputs, betas, gamma, seed, workers) -> list[DiscrepancySolution]:
    return pmap(partial(_solve_at, inputs=inputs, gamma=gamma, seed=seed), betas, workers)


def _share_witnesses(sols: list[DiscrepancySolution]) -> list[DiscrepancySolution]:
    """Score every witness at every beta and keep the best; only upper bounds can improve."""
    out = []
    for s in sols:
        if s.exact:
            out.append(s)
            continue
        best = min(sols, key=lambda o: disc(s.beta, o.unfairness_part, o.error_part))
        v = disc(s.beta, best.unfairness_part, best.error_part)
        if v < s.value - 1e-15:
            s = DiscrepancySolution(s.beta, v, best.unfairness_part, best.error_part, best.baseline, best.witness,
                                    min(s.lower, v), False)
        out.append(s)
    return out


@dataclass(frozen=True)
class ParetoPoint:
    beta: float
    unfairness_lb: float
    error_lb: float
    mindisc: float
    mindisc_lower: float

    @classmethod
    def from_solution(cls, s: DiscrepancySolution) -> "ParetoPoint":
        return cls(s.beta, s.unfairness_part, s.error_part, s.value, s.lower)


@dataclass(frozen=True)
class ParetoCurve:
    """Points ordered by strictly increasing beta.

    For two labels the values are exact. Otherwise ``mindisc`` is an upper
    bound and ``mindisc_lower`` a certified lower bound.
    """

    points: tuple[ParetoPoint, ...]
    normalization: float | None = None

    def __post_init__(self):
        betas = [p.beta for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
            raise ValueError("pareto points must have strictly increasing beta")

    def normalized(self) -> list[tuple[float, float]]:
        d = self.normalization or 1.0
        return [(p.unfairness_lb / d, p.error_lb / d) for p in self.points]


def pareto_curve(inputs: AggregateInputs, n_init: int = 10, gamma: float = 1e-6, refine_budget: int = 10,
                 seed: int = 0, normalization: float | None = None, workers: int | None = None) -> ParetoCurve:
    """Scalarized front: evenly spaced betas, then midpoints where adjacent points are far apart.

    A gap is refined when its Euclidean length in (unfairness, error) exceeds
    the median gap. Each inserted beta costs one unit of ``refine_budget``.
    """
    if n_init < 2:
        raise ValueError("n_init must be at least 2")
    if refine_budget < 0:
        raise ValueError("refine_budget must be nonnegative")
    betas = list(np.linspace(0.0, 1.0, n_init))
    sols = dict(zip(betas, _solve_many(inputs, betas, gamma, seed, workers)))
    budget = refine_budget
    while budget > 0:
        order = sorted(sols)
        pts = np.array([[sols[b].unfairness_part, sols[b].error_part] for b in order])
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        med = float(np.median(gaps))
        wide = [i for i in np.argsort(-gaps, kind="stable") if gaps[i] > med and order[i + 1] - order[i] > 2 * BETA_TOL]
        if not wide:
            break
        new = [(order[i] + order[i + 1]) / 2 for i in wide[:budget]]
        sols.update(zip(new, _solve_many(inputs, new, gamma, seed, workers)))
        budget -= len(new)
    order = sorted(sols)
    final = _share_witnesses([sols[b] for b in order])
    return ParetoCurve(tuple(ParetoPoint.from_solution(s) for s in final), normalization)


@dataclass(frozen=True)
class CapBound:
    """Result of a cap-constrained search over beta.

    ``bound`` is the bounded quantity read off the boundary solution at
    ``beta``. ``certified`` is the weaker value implied by the scalarization
    alone: for any classifier meeting the cap, the bounded quantity is at
    least this large.
    """

    bound: float
    beta: float
    certified: float
    solution: DiscrepancySolution = field(repr=False)


def _cap_search(inputs, gamma, seed, feasible, lo: float, hi: float, cache: dict):
    """Bisect on beta until the feasible and infeasible ends are within BETA_TOL."""

    def at(b):
        if b not in cache:
            cache[b] = solve_discrepancy(inputs, b, gamma, seed)
        return cache[b]

    ok_end, bad_end = lo, hi
    while abs(bad_end - ok_end) > BETA_TOL:
        mid = (ok_end + bad_end) / 2
        if feasible(at(mid)):
            ok_end = mid
        else:
            bad_end = mid
    return ok_end, at(ok_end)


def bound_under_error_cap(inputs: AggregateInputs, error_cap: float, gamma: float = 1e-6, seed: int = 0) -> CapBound:
    """Lower bound on unfairness for classifiers whose error is at most ``error_cap``."""
    if not 0.0 <= error_cap <= 1.0:
        raise ValueError("error_cap must lie in [0, 1]")
    tol = max(gamma, 1e-12)
    top = solve_discrepancy(inputs, 1.0, gamma, seed)
    if top.error_part <= error_cap + tol:
        return CapBound(top.unfairness_part, 1.0, top.lower, top)
    bottom = solve_discrepancy(inputs, 0.0, gamma, seed)
    if bottom.error_part > error_cap + tol:
        raise InfeasibleCap(f"no classifier with these inputs has error <= {error_cap}; minimum is {bottom.error_part:.6g}")
    cache = {0.0: bottom, 1.0: top}
    beta, sol = _cap_search(inputs, gamma, seed, lambda s: s.error_part <= error_cap + tol, 0.0, 1.0, cache)
    certified = max(
        [(s.lower - (1 - b) * error_cap) / b for b, s in cache.items() if b > 0] + [0.0]
    )
    return CapBound(sol.unfairness_part, beta, certified, sol)


def bound_under_unfairness_cap(inputs: AggregateInputs, unfairness_cap: float, gamma: float = 1e-6,
                               seed: int = 0) -> CapBound:
    """Lower bound on error for classifiers whose unfairness is at most ``unfairness_cap``."""
    if not 0.0 <= unfairness_cap <= 1.0:
        raise ValueError("unfairness_cap must lie in [0, 1]")
    tol = max(gamma, 1e-12)
    bottom = solve_discrepancy(inputs, 0.0, gamma, seed)
    if bottom.unfairness_part <= unfairness_cap + tol:
        return CapBound(bottom.error_part, 0.0, bottom.lower, bottom)
    top = solve_discrepancy(inputs, 1.0, gamma, seed)
    if top.lower > unfairness_cap + tol:
        raise InfeasibleCap(f"every classifier with these inputs has unfairness above {unfairness_cap}")
    cache = {0.0: bottom, 1.0: top}
    beta, sol = _cap_search(inputs, gamma, seed, lambda s: s.unfairness_part <= unfairness_cap + tol, 1.0, 0.0, cache)
    certified = max(
        [(s.lower - b * unfairness_cap) / (1 - b) for b, s in cache.items() if b < 1] + [0.0]
    )
    return CapBound(sol.error_part, beta, certified, sol)


@dataclass(frozen=True)
class BetaInterval:
    beta_lo: float
    beta_hi: float
    unfairness: float
    error: float


def beta_sensitivity(inputs: AggregateInputs, gamma: float = 1e-6, step: float = SWEEP_STEP,
                     merge_tol: float | None = None, seed: int = 0, workers: int | None = None) -> list[BetaInterval]:
    """Sweep beta over a grid and merge neighbours whose (unfairness, error) agree within ``merge_tol``."""
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1")
    tol = gamma if merge_tol is None else merge_tol
    betas = [round(i * step, 10) for i in range(n + 1)]
    sols = _share_witnesses(_solve_many(inputs, betas, gamma, seed, workers))
    out: list[BetaInterval] = []
    prev = None
    for b, s in zip(betas, sols):
        cur = (s.unfairness_part, s.error_part)
        if prev is not None and abs(cur[0] - prev[0]) <= tol and abs(cur[1] - prev[1]) <= tol:
            last = out[-1]
            out[-1] = BetaInterval(last.beta_lo, b, last.unfairness, last.error)
        else:
            out.append(BetaInterval(b, b, *cur))
        prev = cur
    return out

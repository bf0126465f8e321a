"""Dense two-phase simplex for small linear programs.

Problems have the form::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                lo <= x <= hi

The solver works on a full tableau and uses Bland's rule, which rules out
cycling at the price of more pivots. ``method="highs"`` hands the same
program to scipy for the larger subproblems of the multiclass search.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import LpFailure, NumericalFailure

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
FEAS_TOL = 1e-7


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LinearProgram:
    objective: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.n
        self.A_eq, self.b_eq = _pair(self.A_eq, self.b_eq, n, "equality")
        self.A_ub, self.b_ub = _pair(self.A_ub, self.b_ub, n, "inequality")
        self.lo = np.zeros(n) if self.lo is None else np.asarray(self.lo, dtype=float).ravel()
        self.hi = np.full(n, np.inf) if self.hi is None else np.asarray(self.hi, dtype=float).ravel()
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bounds must have one entry per variable")
        if np.any(self.lo > self.hi):
            raise ValueError("lower bound above upper bound")

    @property
    def n(self) -> int:
        return self.objective.size

    def residual(self, x: np.ndarray) -> float:
        """Largest constraint violation at x."""
        r = [0.0]
        if self.A_eq.shape[0]:
            r.append(np.abs(self.A_eq @ x - self.b_eq).max())
        if self.A_ub.shape[0]:
            r.append((self.A_ub @ x - self.b_ub).max())
        r.append((self.lo - x).max())
        r.append((x - self.hi).max())
        return float(max(r))


def _pair(A, b, n, what):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] == 0:
        return np.zeros((0, n)), np.zeros(0)
    if A.shape != (b.size, n):
        raise ValueError(f"{what} constraints have shape {A.shape}, rhs {b.shape}, expected (m, {n})")
    return A, b


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Tableau with the objective in the last row and rhs in the last column."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], max_iter: int):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.max_iter = max_iter
        self.iterations = 0
        self.tiny_pivots = 0

    def set_objective(self, c: np.ndarray) -> None:
        T = self.T
        T[-1, :] = 0.0
        T[-1, : c.size] = c
        for i, j in enumerate(self.basis):
            if T[-1, j] != 0.0:
                T[-1, :] -= T[-1, j] * T[i, :]

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        piv = T[r, j]
        if abs(piv) < 1e-12:
            self.tiny_pivots += 1
            if self.tiny_pivots > 5:
                raise NumericalFailure("pivot magnitudes fell below 1e-12 repeatedly")
        T[r, :] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r, :])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray) -> bool:
        """Optimize with Bland's rule over the allowed columns; False if unbounded."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalFailure(f"simplex did not converge in {self.max_iter} pivots")
            red = T[-1, :-1]
            cand = np.flatnonzero((red < -COST_TOL) & allowed)
            if cand.size == 0:
                return True
            j = int(cand[0])
            col = T[:m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, j)


def _standard_form(lp: LinearProgram):
    """Rewrite as A x' = b, x' >= 0, with a map back to the original variables."""
    n = lp.n
    cols = []  # (original index, sign, offset) per standard column
    offset = np.zeros(n)
    extra_ub_rows = []
    for j in range(n):
        lo, hi = lp.lo[j], lp.hi[j]
        if np.isfinite(lo):
            cols.append((j, 1.0))
            offset[j] = lo
            if np.isfinite(hi):
                extra_ub_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            cols.append((j, -1.0))
            offset[j] = hi
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ns = len(cols)
    M = np.zeros((n, ns))
    for s, (j, sign) in enumerate(cols):
        M[j, s] = sign
    # x = offset + M @ xs
    c = lp.objective @ M
    const = float(lp.objective @ offset)
    A_eq = lp.A_eq @ M
    b_eq = lp.b_eq - lp.A_eq @ offset
    A_ub = lp.A_ub @ M
    b_ub = lp.b_ub - lp.A_ub @ offset
    if extra_ub_rows:
        B = np.zeros((len(extra_ub_rows), ns))
        for i, (s, ub) in enumerate(extra_ub_rows):
            B[i, s] = 1.0
        A_ub = np.vstack([A_ub, B])
        b_ub = np.concatenate([b_ub, [ub for _, ub in extra_ub_rows]])
    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    A = np.zeros((m_eq + m_ub, ns + m_ub))
    A[:m_eq, :ns] = A_eq
    A[m_eq:, :ns] = A_ub
    A[m_eq:, ns:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    c_full = np.concatenate([c, np.zeros(m_ub)])
    slack_of_row = [-1] * m_eq + list(range(ns, ns + m_ub))
    return A, b, c_full, const, M, offset, slack_of_row


def _solve_simplex(lp: LinearProgram, max_iter: int) -> LpSolution:
    A, b, c, const, M, offset, slack_of_row = _standard_form(lp)
    m, n = A.shape
    if m == 0:
        if np.any(c < -COST_TOL):
            return LpSolution(LpStatus.UNBOUNDED)
        x = offset.copy()
        return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x))
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    # rows whose slack is a ready-made basic variable need no artificial
    basis = []
    art_rows = []
    for i in range(m):
        s = slack_of_row[i]
        if s >= 0 and not neg[i]:
            basis.append(s)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_art = len(art_rows)
    A1 = np.hstack([A, np.zeros((m, n_art))])
    for a, i in enumerate(art_rows):
        A1[i, n + a] = 1.0
        basis[i] = n + a
    tab = _Tableau(A1, b, basis, max_iter)
    if n_art:
        c1 = np.zeros(n + n_art)
        c1[n:] = 1.0
        tab.set_objective(c1)
        tab.run(np.ones(n + n_art, dtype=bool))
        if -tab.T[-1, -1] > FEAS_TOL:
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n:
                row = tab.T[i, :n]
                nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(i, int(nz[0]))
                    keep.append(i)
            else:
                keep.append(i)
        T = tab.T
        new_T = np.vstack([T[keep][:, list(range(n)) + [T.shape[1] - 1]], np.zeros((1, n + 1))])
        tab.T = new_T
        tab.basis = [tab.basis[i] for i in keep]
    tab.set_objective(c)
    if not tab.run(np.ones(n, dtype=bool)):
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)
    xs = np.zeros(n)
    for i, j in enumerate(tab.basis):
        xs[j] = tab.T[i, -1]
    x = offset + M @ xs[: M.shape[1]]
    x = np.clip(x, lp.lo, lp.hi)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), tab.iterations)


def _solve_highs(lp: LinearProgram) -> LpSolution:
    from scipy.optimize import linprog

    bounds = [(None if not np.isfinite(l) else l, None if not np.isfinite(h) else h) for l, h in zip(lp.lo, lp.hi)]
    res = linprog(
        lp.objective,
        A_ub=lp.A_ub if lp.A_ub.shape[0] else None,
        b_ub=lp.b_ub if lp.A_ub.shape[0] else None,
        A_eq=lp.A_eq if lp.A_eq.shape[0] else None,
        b_eq=lp.b_eq if lp.A_eq.shape[0] else None,
        bounds=bounds,
        method="highs-ds",
    )
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    if res.status != 0:
        raise LpFailure(res.message)
    x = np.clip(res.x, lp.lo, lp.hi)
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), int(res.nit))


def solve(lp: LinearProgram, method: str = "simplex", max_iter: int = 100_000) -> LpSolution:
    if method == "simplex":
        sol = _solve_simplex(lp, max_iter)
    elif method == "highs":
        sol = _solve_highs(lp)
    else:
        raise ValueError(f"unknown LP method {method!r}")
    if sol.optimal and lp.residual(sol.x) > FEAS_TOL:
        raise NumericalFailure(f"LP residual {lp.residual(sol.x):.3g} exceeds {FEAS_TOL}")
    return sol

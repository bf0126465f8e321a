"""Independent reference computations used to check the package.

Nothing here imports solver code from fairscope; each routine recomputes its
quantity from first principles, usually by brute force.
"""
from __future__ import annotations

import itertools

import numpy as np


def eta_ref(a, b):
    """Mixture weight needed to move probability a to b, written out case by case."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        down = np.where(a > 0, 1.0 - b / np.where(a > 0, a, 1.0), 1.0)
        up = np.where(a < 1, 1.0 - (1.0 - b) / np.where(a < 1, 1.0 - a, 1.0), 1.0)
    return np.where(b < a, down, np.where(b > a, up, 0.0))


def tau_ref(beta, a, b):
    return beta * eta_ref(a, b) + (1.0 - beta) * (1.0 - np.asarray(b, dtype=float))


# ---------------------------------------------------------------- linear programs

def lp_vertex_enumeration(c, A_ub, b_ub, lo, hi, tol=1e-9):
    """Minimize c.x over {A_ub x <= b_ub, lo <= x <= hi} by enumerating all vertices.

    Every vertex is the solution of n linearly independent active constraints.
    Returns (status, value) with status in {"optimal", "infeasible"}; the box
    keeps the region bounded.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    rows = [np.asarray(r, dtype=float) for r in A_ub] + list(np.eye(n)) + list(-np.eye(n))
    rhs = list(b_ub) + list(hi) + [-v for v in lo]
    M = np.array(rows)
    r = np.array(rhs, dtype=float)
    best = None
    for idx in itertools.combinations(range(len(rows)), n):
        sub = M[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, r[list(idx)])
        if np.all(M @ x <= r + tol):
            v = float(c @ x)
            if best is None or v < best:
                best = v
    return ("infeasible", None) if best is None else ("optimal", best)


# ---------------------------------------------------------------- binary discrepancy

def binary_group_params(pi1, p1):
    """Affine link between a group's false positive rate x and false negative rate: fnr = r + q x."""
    pi0 = 1.0 - pi1
    r = 1.0 - p1 / pi1
    q = pi0 / pi1
    lo = max((p1 - pi1) / pi0, 0.0)
    hi = min(p1 / pi0, 1.0)
    return r, q, lo, hi


def binary_disc_terms(beta, b_fpr, b_fnr, pi1, x, fnr):
    """Per-group discrepancy with baseline error rates (b_fpr, b_fnr) and group rates (x, fnr)."""
    pi0 = 1.0 - pi1
    unf = pi0 * eta_ref(b_fpr, x) + pi1 * eta_ref(b_fnr, fnr)
    err = pi0 * x + pi1 * fnr
    return beta * unf + (1.0 - beta) * err


def binary_group_min_grid(beta, b_fpr, b_fnr, pi1, p1, step=1e-5):
    """min over the feasible false positive rates of one group, on a dense grid."""
    if pi1 == 0:
        return float(binary_disc_terms(beta, b_fpr, b_fnr, 0.0, p1, 0.0))
    if pi1 == 1:
        return float(binary_disc_terms(beta, b_fpr, b_fnr, 1.0, 0.0, 1.0 - p1))
    r, q, lo, hi = binary_group_params(pi1, p1)
    xs = np.linspace(lo, hi, max(int(np.ceil((hi - lo) / step)) + 1, 2))
    return float(binary_disc_terms(beta, b_fpr, b_fnr, pi1, xs, np.clip(r + q * xs, 0, 1)).min())


def _eta_fast(a, b):
    """eta for broadcastable arrays, as the larger of its two smooth branches.

    At a = 0 or a = 1 one branch is undefined (nan or -inf) and fmax drops it.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.fmax(np.fmax(1.0 - b / a, 1.0 - (1.0 - b) / (1.0 - a)), 0.0)


def binary_mindisc_grid(beta, w, pi1, p1, step=2e-4, chunk=500):
    """Minimum discrepancy by a dense grid over both baseline error rates.

    For a fixed baseline each group term is convex and piecewise linear in the
    group's false positive rate, so its minimum sits at an end of the feasible
    range or where one of the two eta terms has its kink. Terms that depend on
    only one baseline coordinate are computed once and broadcast.
    """
    n = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, n + 1)
    B1 = grid[None, :]
    best = np.inf
    for s in range(0, grid.size, chunk):
        B0 = grid[s:s + chunk, None]
        tot = np.zeros((B0.size, grid.size))
        for wg, a, b in zip(w, pi1, p1):
            if wg <= 0:
                continue
            if a == 0 or a == 1:
                x, fnr = (b, 0.0) if a == 0 else (0.0, 1.0 - b)
                tot += wg * (beta * ((1 - a) * _eta_fast(B0, x) + a * _eta_fast(B1, fnr)) + (1 - beta) * ((1 - a) * x + a * fnr))
                continue
            r, q, lo, hi = binary_group_params(a, b)
            a0 = 1.0 - a

            def term(x_fpr, fnr, fpr_part, fnr_part):
                return wg * (beta * (a0 * fpr_part + a * fnr_part) + (1 - beta) * (a0 * x_fpr + a * fnr))

            g = None
            for x in (lo, hi):
                fnr = min(max(r + q * x, 0.0), 1.0)
                v = term(x, fnr, _eta_fast(B0, x), _eta_fast(B1, fnr))
                g = v if g is None else np.minimum(g, v)
            x = np.clip(B0, lo, hi)
            fnr = np.clip(r + q * x, 0.0, 1.0)
            g = np.minimum(g, term(x, fnr, _eta_fast(B0, x), _eta_fast(B1, fnr)))
            x = np.clip((B1 - r) / q, lo, hi)
            fnr = np.clip(r + q * x, 0.0, 1.0)
            g = np.minimum(g, term(x, fnr, _eta_fast(B0, x), _eta_fast(B1, fnr)))
            tot += g
        best = min(best, float(tot.min()))
    return best


def sample_binary_witness(rng, pi1, p1):
    """Random false positive rates inside each group's feasible range; returns (G, 2, 2) matrices."""
    mats = []
    for a, b in zip(pi1, p1):
        if a == 0:
            x = b
            fnr = 0.0
        elif a == 1:
            x = 0.0
            fnr = 1.0 - b
        else:
            r, q, lo, hi = binary_group_params(a, b)
            x = rng.uniform(lo, hi)
            fnr = min(max(r + q * x, 0.0), 1.0)
        mats.append([[1 - x, x], [fnr, 1 - fnr]])
    return np.array(mats)


# ---------------------------------------------------------------- known matrices

def binary_unfairness_grid(w, true, mats, step=1e-4):
    """Exact-binary unfairness by a grid over each baseline diagonal entry."""
    xs = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    total = 0.0
    for y in (0, 1):
        c = w * true[:, y]
        vals = (c[None, :] * eta_ref(xs[:, None], mats[None, :, y, y])).sum(axis=1)
        total += vals.min()
    return float(total)


def simplex_grid(k, step):
    n = int(round(1.0 / step))
    pts = [np.array(c + (n - sum(c),)) / n for c in itertools.product(range(n + 1), repeat=k - 1) if sum(c) <= n]
    return np.array(pts)


def multiclass_unfairness_grid(w, true, mats, step=5e-3):
    """Unfairness minimized over a simplex grid of baseline rows, one label at a time."""
    k = mats.shape[1]
    P = simplex_grid(k, step)
    total = 0.0
    for y in range(k):
        c = w * true[:, y]
        if c.sum() == 0:
            continue
        vals = (c[None, :] * eta_ref(P[:, None, :], mats[None, :, y, :]).max(axis=2)).sum(axis=1)
        total += vals.min()
    return float(total)


def population_error(w, true, mats, size=10_000):
    """Error counted over an explicit finite population realizing the proportions exactly.

    Sizes are chosen so every cell count is an integer for inputs given on a
    1/size lattice.
    """
    mistakes = 0
    people = 0
    for wg, t, A in zip(w, true, mats):
        for y in range(len(t)):
            n_y = int(round(wg * t[y] * size))
            for z in range(len(t)):
                cnt = int(round(n_y * A[y, z]))
                people += cnt
                if z != y:
                    mistakes += cnt
    return mistakes / people


def _zoom_min(f, lo, hi, coarse=1e-4, fine=1e-8):
    """Minimize f on [lo, hi]: a coarse grid, then a fine grid around the best coarse points."""
    xs = np.linspace(lo, hi, max(int(round((hi - lo) / coarse)) + 1, 2))
    vals = f(xs)
    best = float(vals.min())
    for i in np.argsort(vals)[:5]:
        a, b = max(lo, xs[i] - 2 * coarse), min(hi, xs[i] + 2 * coarse)
        best = min(best, float(f(np.linspace(a, b, int(round((b - a) / fine)) + 1)).min()))
    return best


def binary_unfairness_zoom(w, true, mats):
    """Exact-binary unfairness to about 1e-8 by a zoomed grid over each baseline diagonal entry."""
    total = 0.0
    for y in (0, 1):
        c = w * true[:, y]
        total += _zoom_min(lambda xs: (c[None, :] * eta_ref(xs[:, None], mats[None, :, y, y])).sum(axis=1), 0.0, 1.0)
    return total


def binary_group_min_zoom(beta, b_fpr, b_fnr, pi1, p1):
    """Per-group minimum over the feasible false positive rates by a zoomed grid."""
    r, q, lo, hi = binary_group_params(pi1, p1)
    return _zoom_min(lambda xs: binary_disc_terms(beta, b_fpr, b_fnr, pi1, xs, np.clip(r + q * xs, 0, 1)), lo, hi,
                     coarse=1e-5)

"""Mixture-weight function eta, its blend tau with error, and derivative bounds.

``eta(a, b)`` is the smallest weight t such that a probability ``b`` can be
written as ``(1 - t) * a + t * n`` for some probability ``n``. All functions
accept scalars or numpy arrays.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, HypothesisViolation

_DOMAIN_SLACK = 1e-12


def _check_unit(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < -_DOMAIN_SLACK) or np.any(arr > 1 + _DOMAIN_SLACK):
        raise DomainError(f"{name} must lie in [0, 1]")


def _check_open(name: str, x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise DomainError(f"{name} must lie in the open interval (0, 1)")


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def eta_unchecked(a, b):
    """eta on arrays already known to lie in [0, 1]; skips validation."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        down = 1.0 - b / a
        up = 1.0 - (1.0 - b) / (1.0 - a)
    res = np.where(b < a, down, np.where(b > a, up, 0.0))
    return np.clip(res, 0.0, 1.0)


def eta(a, b):
    _check_unit("a", a)
    _check_unit("b", b)
    a = np.clip(np.asarray(a, dtype=float), 0.0, 1.0)
    b = np.clip(np.asarray(b, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        down = np.where(a > 0, 1.0 - b / np.where(a > 0, a, 1.0), 1.0)
        up = np.where(a < 1, 1.0 - (1.0 - b) / np.where(a < 1, 1.0 - a, 1.0), 1.0)
    res = np.where(b < a, down, np.where(b > a, up, 0.0))
    return _out(np.clip(res, 0.0, 1.0))


def eta_split(a, b):
    """Both branches ``(1 - b/a, 1 - (1-b)/(1-a))``; their maximum equals eta."""
    _check_open("a", a)
    _check_unit("b", b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return _out(1.0 - b / a), _out(1.0 - (1.0 - b) / (1.0 - a))


def tau(beta, a, b):
    _check_unit("beta", beta)
    return _out(np.asarray(beta) * np.asarray(eta(a, b)) + (1.0 - np.asarray(beta)) * (1.0 - np.asarray(b, dtype=float)))


def eta_partial_a(a, b):
    _check_open("a", a)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = np.where(a > b, b / a**2, np.where(a < b, -(1.0 - b) / (1.0 - a) ** 2, 0.0))
    return _out(res)


def eta_partial_b(a, b):
    _check_open("a", a)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = np.where(a > b, -1.0 / a, np.where(a < b, 1.0 / (1.0 - a), 0.0))
    return _out(res)


def eta_split_partials(a, b):
    """Partials of both split branches: ``((d1/da, d1/db), (d2/da, d2/db))``."""
    _check_open("a", a)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (
        (_out(b / a**2), _out(-1.0 / a + 0 * b)),
        (_out(-(1.0 - b) / (1.0 - a) ** 2), _out(1.0 / (1.0 - a) + 0 * b)),
    )


class Side(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    EQUAL = "Equal"


@dataclass(frozen=True)
class AffinePair:
    """The map x -> (a + b x, c + d x)."""

    a: float
    b: float
    c: float
    d: float

    def crossing(self) -> float | None:
        """Point where both coordinates agree, or None when the slopes match."""
        if self.b == self.d:
            return None
        return (self.c - self.a) / (self.b - self.d)

    def side_of(self, x: float) -> Side:
        x0 = self.crossing()
        if x0 is None:
            return Side.EQUAL
        return Side.LEFT if x < x0 else Side.RIGHT


def _d_bound(a: float, b: float, c: float, d: float) -> float:
    """Bound on |d/dx (1 - (c+dx)/(a+bx))| where a+bx > c+dx >= 0."""
    det = b * c - a * d
    if d == 0:
        return b / c if c > 0 else 0.0
    if a * d > b * c:
        return d * d / abs(det)
    if a * d < b * c and b > d:
        den = a + b * (c - a) / (b - d)
        return abs(det) / den**2 if den > 0 else math.inf
    return 0.0


def psi_deriv_bound(p: AffinePair, beta: float, side: Side) -> float:
    """Upper bound on |d/dx tau_beta(a+bx, c+dx)| over one side of the crossing.

    The eta part is bounded on the side where it takes the form
    ``1 - (c+dx)/(a+bx)`` (first argument above the second) or the mirrored
    form. The error part contributes exactly ``(1 - beta) * d``.
    """
    a, b, c, d = p.a, p.b, p.c, p.d
    if not (b > 0 and d >= 0 and a <= 1 and c <= 1):
        raise HypothesisViolation(f"bound needs b > 0, d >= 0, a <= 1, c <= 1; got {p}")
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    if b == d:
        eta_bound = d / abs(a - c) if a != c else 0.0
    else:
        if side is Side.EQUAL:
            raise HypothesisViolation("side must be Left or Right when the slopes differ")
        first_above = (d > b and side is Side.LEFT) or (d < b and side is Side.RIGHT)
        if first_above:
            eta_bound = _d_bound(a, b, c, d)
        else:
            eta_bound = _d_bound(1 - a - b, b, 1 - c - d, d)
    return beta * eta_bound + (1 - beta) * d

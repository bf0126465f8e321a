from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fairscope import AggregateInputs, ConfusionSet, parse_inputs_csv

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).resolve().parent.parent / "data"

# Published two-population results, as fractions: (min unfairness, min error).
TABLE_MIN = {
    "exp1": (0.0052, 0.0266),
    "exp2": (0.0027, 0.0266),
    "exp3": (0.0207, 0.0353),
    "exp4": (0.0052, 0.0367),
    "exp5": (0.0334, 0.0580),
    "exp6": (0.0359, 0.0367),
}

# Published beta plateaus: (first beta, last beta, unfairness, error).
TABLE_BETA = {
    "exp3": [(0.0, 0.78, 0.0327, 0.0353), (0.79, 1.0, 0.0207, 0.0766)],
    "exp4": [(0.01, 0.05, 0.0367, 0.0367), (0.06, 0.1, 0.0347, 0.0368), (0.06, 0.32, 0.0216, 0.0383),
             (0.33, 1.0, 0.0052, 0.0457)],
    "exp6": [(0.0, 0.98, 0.0367, 0.0367), (0.99, 1.0, 0.0359, 0.0672)],
}

_CRITERIA: dict[int, tuple[bool, str]] = {}


def load(name: str) -> AggregateInputs:
    return parse_inputs_csv(DATA / f"{name}.csv")


@pytest.fixture
def record_criterion():
    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = (ok, detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def random_binary_inputs(rng, n_groups=None, interior=True) -> AggregateInputs:
    G = int(n_groups or rng.integers(1, 6))
    w = rng.dirichlet(np.ones(G))
    lo, hi = (0.02, 0.98) if interior else (0.0, 1.0)
    pi1 = rng.uniform(lo, hi, G)
    p1 = rng.uniform(lo, hi, G)
    return AggregateInputs.binary(w, pi1, p1)


def random_confusion_set(rng, k=3, n_groups=None, concentration=1.0) -> ConfusionSet:
    G = int(n_groups or rng.integers(2, 5))
    w = rng.dirichlet(np.ones(G))
    pi = rng.dirichlet(np.ones(k), G)
    mats = rng.dirichlet(np.full(k, concentration), (G, k))
    return ConfusionSet.from_arrays(w, pi, mats)


def fair_confusion_set(rng, k=3, n_groups=3) -> ConfusionSet:
    w = rng.dirichlet(np.ones(n_groups))
    pi = rng.dirichlet(np.ones(k), n_groups)
    A = rng.dirichlet(np.ones(k), k)
    return ConfusionSet.from_arrays(w, pi, np.repeat(A[None], n_groups, axis=0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

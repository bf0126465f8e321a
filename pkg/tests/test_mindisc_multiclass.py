import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from conftest import fair_confusion_set, random_confusion_set
from fairscope import (
    AggregateInputs,
    ConfusionSet,
    DiscrepancyQuery,
    SlpParams,
    error_of,
    mindisc_binary,
    mindisc_multiclass,
    mindisc_multiclass_lower,
    mindisc_multiclass_upper,
    unfairness_multiclass_bounds,
)

seeds = st.integers(0, 2**32 - 1)


def _min_error_lp(inputs: AggregateInputs) -> float:
    """Smallest error over per-group consistent matrices, one scipy LP per group."""
    k = inputs.k
    total = 0.0
    for w, t, p in zip(inputs.weights, inputs.true, inputs.pred):
        c = -np.array([t[y] if y == z else 0.0 for y in range(k) for z in range(k)])
        rows = [np.kron(np.eye(k), np.ones(k))]
        cons = np.zeros((k, k * k))
        for z in range(k):
            for y in range(k):
                cons[z, y * k + z] = t[y]
        rows.append(cons)
        res = linprog(c, A_eq=np.vstack(rows), b_eq=np.concatenate([np.ones(k), p]), bounds=(0, 1), method="highs")
        assert res.status == 0
        total += w * (1.0 + res.fun)
    return total


def _collapse(inputs: AggregateInputs, y: int) -> AggregateInputs:
    """Two-label view: label y against every other label, on truth and predictions alike."""
    t, p = inputs.true[:, y], inputs.pred[:, y]
    return AggregateInputs.binary(inputs.weights, t, p)


@settings(max_examples=6)
@given(seeds)
def test_fair_inputs_stay_near_fair_witness(seed):
    rng = np.random.default_rng(seed)
    cs = fair_confusion_set(rng)
    beta = float(rng.uniform())
    sol = mindisc_multiclass_upper(cs.inputs(), beta)
    assert sol.value <= (1 - beta) * error_of(cs) + 5e-3


@settings(max_examples=6)
@given(seeds)
def test_beta_zero_is_pure_error_lp(seed):
    cs = random_confusion_set(np.random.default_rng(seed), k=3)
    sol = mindisc_multiclass(cs.inputs(), 0.0)
    ref = _min_error_lp(cs.inputs())
    assert sol.value == pytest.approx(ref, abs=1e-7)
    assert sol.lower == pytest.approx(ref, abs=1e-7)


@settings(max_examples=6)
@given(seeds)
def test_binary_upper_not_below_exact(seed):
    rng = np.random.default_rng(seed)
    G = int(rng.integers(1, 4))
    inputs = AggregateInputs.binary(rng.dirichlet(np.ones(G)), rng.uniform(0.05, 0.95, G), rng.uniform(0.05, 0.95, G))
    beta = float(rng.uniform())
    exact = mindisc_binary(inputs, DiscrepancyQuery(beta, 1e-6)).value
    assert mindisc_multiclass_upper(inputs, beta).value >= exact - 1e-6
    # the wrapper hands two labels to the exact solver
    assert mindisc_multiclass(inputs, beta).value == pytest.approx(exact, abs=1e-12)


@settings(max_examples=6)
@given(seeds)
def test_bounds_bracket_known_witness(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng, k=3)
    beta = float(rng.uniform())
    sol = mindisc_multiclass(cs.inputs(), beta)
    known = beta * unfairness_multiclass_bounds(cs).upper + (1 - beta) * error_of(cs)
    assert sol.lower <= sol.value + 1e-12
    assert sol.lower <= known + 1e-9
    assert not sol.exact
    w = sol.witness
    assert np.allclose(np.einsum("gyz,gy->gz", w.matrices, w.true), cs.pred, atol=1e-6)


def test_fair_inputs_have_zero_lower_bound():
    cs = fair_confusion_set(np.random.default_rng(1))
    assert mindisc_multiclass_lower(cs.inputs(), 1.0) == pytest.approx(0.0, abs=1e-9)


def test_label_collapse_is_not_a_lower_bound():
    # A fair three-label classifier whose groups mix the non-target labels
    # differently looks unfair once those labels are merged.
    A = np.array([[0.9, 0.1, 0.0], [0.0, 0.2, 0.8], [0.1, 0.0, 0.9]])
    true = np.array([[0.2, 0.7, 0.1], [0.2, 0.1, 0.7]])
    cs = ConfusionSet.from_arrays([0.5, 0.5], true, [A, A])
    collapsed = mindisc_binary(_collapse(cs.inputs(), 0), DiscrepancyQuery(1.0, 1e-6)).value
    assert collapsed > 0.01
    assert mindisc_multiclass_lower(cs.inputs(), 1.0) <= 1e-9


def test_init_variants_and_params():
    cs = random_confusion_set(np.random.default_rng(2), k=3, n_groups=2)
    inputs = cs.inputs()
    a = mindisc_multiclass_upper(inputs, 0.5, init=cs)
    b = mindisc_multiclass_upper(inputs, 0.5, init=cs.matrices, params=SlpParams(max_iter=5))
    assert a.value <= 0.5 * unfairness_multiclass_bounds(cs).upper + 0.5 * error_of(cs) + 1e-9
    assert b.value >= 0
    with pytest.raises(ValueError):
        mindisc_multiclass_upper(inputs, 0.5, init="random")

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA, fair_confusion_set, random_confusion_set
from oracles import binary_unfairness_zoom, multiclass_unfairness_grid
from fairscope import (
    ConfusionSet,
    LabelMapping,
    apply_label_mapping,
    parse_confusions_csv,
    unfairness_binary_exact,
    unfairness_multiclass_bounds,
)
from fairscope.unfairness import (
    greedy_baseline,
    greedy_baseline_multi,
    local_minimize_row,
    objective_y,
    unfairness_multiclass_lower,
    weighted_average_row,
)

seeds = st.integers(0, 2**32 - 1)


def _binary_set(rng, G=None):
    G = G or int(rng.integers(1, 6))
    pi1 = rng.uniform(0.02, 0.98, G)
    return ConfusionSet.from_arrays(rng.dirichlet(np.ones(G)), np.stack([1 - pi1, pi1], 1),
                                    rng.dirichlet(np.ones(2), (G, 2)))


def test_objective_zero_when_baseline_matches():
    cs = fair_confusion_set(np.random.default_rng(0))
    for y in range(3):
        assert objective_y(cs.matrices[0, y], cs, y) == 0.0


@settings(max_examples=30)
@given(seeds)
def test_objective_range(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng)
    y = int(rng.integers(3))
    v = objective_y(rng.dirichlet(np.ones(3)), cs, y)
    assert 0.0 <= v <= float(np.sum(cs.weights * cs.true[:, y])) + 1e-12


def test_two_regions_unfair_set():
    res = unfairness_binary_exact(parse_confusions_csv(DATA / "two_regions_unfair.csv"))
    assert res.exact and res.upper == pytest.approx(0.10, abs=1e-12)


def test_identical_matrices_zero_and_witness():
    A = np.array([[0.8, 0.2], [0.3, 0.7]])
    cs = ConfusionSet.from_arrays([0.4, 0.6], [[0.5, 0.5], [0.2, 0.8]], [A, A])
    res = unfairness_binary_exact(cs)
    assert res.upper == 0.0 and np.allclose(res.baseline_witness.entries, A)


def test_single_full_weight_group():
    rng = np.random.default_rng(1)
    cs = ConfusionSet.from_arrays([1.0, 0.0], [[0.5, 0.5], [0.2, 0.8]], rng.dirichlet(np.ones(2), (2, 2)))
    assert unfairness_binary_exact(cs).upper == 0.0


@settings(max_examples=20)
@given(seeds)
def test_binary_exact_matches_zoom_oracle(seed):
    cs = _binary_set(np.random.default_rng(seed))
    got = unfairness_binary_exact(cs).upper
    ref = binary_unfairness_zoom(cs.weights, cs.true, cs.matrices)
    assert got <= ref + 1e-12
    assert ref - got <= 1e-6


@settings(max_examples=20)
@given(seeds)
def test_k2_lower_equals_exact_per_label(seed):
    cs = _binary_set(np.random.default_rng(seed))
    exact = unfairness_binary_exact(cs)
    lower = unfairness_multiclass_lower(cs)
    assert np.allclose(lower, [lo for lo, _ in exact.per_label], atol=1e-12)


def test_multiclass_fair_set_is_zero():
    res = unfairness_multiclass_bounds(fair_confusion_set(np.random.default_rng(2)))
    assert res.lower == 0.0 and res.upper <= 1e-9


@settings(max_examples=10)
@given(seeds)
def test_multiclass_bracket_against_grid(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng, k=3, n_groups=3)
    res = unfairness_multiclass_bounds(cs)
    assert res.lower <= res.upper
    grid = multiclass_unfairness_grid(cs.weights, cs.true, cs.matrices, step=1e-2)
    assert res.lower <= grid + 1e-12
    # the upper bound comes with a baseline that attains it
    etas_total = float(np.sum(cs.weights[:, None] * cs.true * res.per_group_eta))
    assert etas_total == pytest.approx(res.upper, abs=1e-12)


@settings(max_examples=20)
@given(seeds)
def test_greedy_never_below_lower(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng, k=3)
    lower = unfairness_multiclass_lower(cs)
    for y in range(3):
        row = greedy_baseline(cs, y, rng.permutation([z for z in range(3) if z != y]))
        assert row.sum() == pytest.approx(1.0) and np.all(row >= -1e-12)
        assert objective_y(row, cs, y) >= lower[y] - 1e-12


def test_greedy_on_fair_set():
    cs = fair_confusion_set(np.random.default_rng(3))
    for y in range(3):
        row = greedy_baseline(cs, y, [z for z in (2, 0, 1) if z != y])
        assert np.allclose(row, cs.matrices[0, y]) and objective_y(row, cs, y) == pytest.approx(0.0, abs=1e-12)
        assert objective_y(greedy_baseline_multi(cs, y, 4, seed=7), cs, y) == pytest.approx(0.0, abs=1e-12)


def test_greedy_multi_deterministic():
    cs = random_confusion_set(np.random.default_rng(4))
    a = greedy_baseline_multi(cs, 1, 1, seed=11)
    b = greedy_baseline_multi(cs, 1, 1, seed=11)
    assert np.array_equal(a, b)


def test_local_minimize_keeps_stationary_start():
    cs = fair_confusion_set(np.random.default_rng(5))
    start = cs.matrices[0, 1]
    assert np.allclose(local_minimize_row(start, cs, 1), start, atol=1e-9)


@settings(max_examples=20)
@given(seeds)
def test_local_minimize_never_worsens(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng, k=3)
    for y in range(3):
        start = weighted_average_row(cs, y)
        end = local_minimize_row(start, cs, y)
        assert end.sum() == pytest.approx(1.0) and np.all(end >= -1e-12)
        assert objective_y(end, cs, y) <= objective_y(start, cs, y) + 1e-12


def test_label_mappings():
    cs = random_confusion_set(np.random.default_rng(6), k=3)
    same = apply_label_mapping(cs, LabelMapping.identity(3))
    assert np.allclose(same.matrices, cs.matrices)
    collapsed = apply_label_mapping(cs, LabelMapping.correct_vs_mistake(3)).matrices
    assert np.allclose(collapsed[:, :, 2], 0.0)
    for y in range(3):
        assert np.allclose(collapsed[:, y, 0], cs.matrices[:, y, y])
    with pytest.raises(ValueError):
        LabelMapping(((0, 3), (0, 1)))


@settings(max_examples=15)
@given(seeds)
def test_merging_predictions_cannot_raise_unfairness(seed):
    rng = np.random.default_rng(seed)
    cs = random_confusion_set(rng, k=3)
    maps = tuple(tuple(int(v) for v in rng.integers(0, 3, 3)) for _ in range(3))
    mapped = apply_label_mapping(cs, LabelMapping(maps))
    assert unfairness_multiclass_bounds(mapped).lower <= unfairness_multiclass_bounds(cs).upper + 1e-9

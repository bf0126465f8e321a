import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import eta_ref, tau_ref
from fairscope import eta, tau
from fairscope.errors import DomainError, HypothesisViolation
from fairscope.scalarfuncs import (
    AffinePair,
    Side,
    eta_partial_a,
    eta_partial_b,
    eta_split,
    eta_split_partials,
    psi_deriv_bound,
)

unit = st.floats(0.0, 1.0)
open_unit = st.floats(1e-6, 1 - 1e-6)


@pytest.mark.parametrize("a,b,want", [(0.3, 0.3, 0.0), (0.5, 0.25, 0.5), (0.2, 0.8, 0.75)])
def test_eta_examples(a, b, want):
    assert eta(a, b) == pytest.approx(want, abs=1e-15)


def test_eta_boundary_values():
    assert eta(0.0, 0.0) == 0.0
    assert eta(1.0, 1.0) == 0.0
    # moving all mass away from a point mass costs the mass moved
    assert eta(0.0, 0.4) == pytest.approx(0.4)
    assert eta(1.0, 0.4) == pytest.approx(0.6)
    assert eta(0.0, 1.0) == 1.0


def test_eta_rejects_out_of_range():
    with pytest.raises(DomainError):
        eta(1.2, 0.5)
    with pytest.raises(DomainError):
        eta(0.5, float("nan"))


@given(unit, unit)
def test_eta_matches_reference(a, b):
    assert eta(a, b) == pytest.approx(float(eta_ref(a, b)), abs=1e-12)


@given(unit, unit)
def test_eta_is_a_mixture_weight(a, b):
    t = eta(a, b)
    assert 0.0 <= t <= 1.0
    if t < 1:
        # the residual distribution n = (b - (1-t) a) / t is a probability
        if t > 1e-9:
            n = (b - (1 - t) * a) / t
            assert -1e-9 <= n <= 1 + 1e-9
        else:
            assert abs(a - b) <= 1e-9


@given(unit, unit, unit)
def test_eta_triangle(a, b, c):
    # composing two mixtures is one mixture
    assert eta(a, c) <= eta(a, b) + eta(b, c) + 1e-9


def test_eta_split_examples():
    first, second = eta_split(0.35, 0.25)
    assert first == pytest.approx(0.2857142857, abs=1e-9)
    assert second == pytest.approx(-0.1538461538, abs=1e-9)
    assert max(first, second) == pytest.approx(eta(0.35, 0.25))
    assert eta_split(0.5, 0.5) == (0.0, 0.0)


@given(open_unit, unit)
def test_eta_is_max_of_split(a, b):
    assert max(max(eta_split(a, b)), 0.0) == pytest.approx(eta(a, b), abs=1e-9)


@pytest.mark.parametrize("beta,a,b,want", [(0.0, 0.9, 0.3, 0.7), (0.5, 0.5, 0.25, 0.625), (1.0, 0.5, 0.25, 0.5)])
def test_tau_examples(beta, a, b, want):
    assert tau(beta, a, b) == pytest.approx(want, abs=1e-15)


@given(unit, unit, unit)
def test_tau_matches_reference(beta, a, b):
    assert tau(beta, a, b) == pytest.approx(float(tau_ref(beta, a, b)), abs=1e-12)


def test_partials_examples():
    assert eta_partial_a(0.5, 0.25) == pytest.approx(1.0)
    assert eta_partial_a(0.25, 0.5) == pytest.approx(-0.5 / 0.5625)
    assert eta_partial_a(0.4, 0.4) == 0.0
    assert eta_partial_b(0.5, 0.25) == pytest.approx(-2.0)


@given(st.floats(0.01, 0.99), st.floats(0.0, 1.0))
def test_partials_match_finite_differences(a, b):
    h = 1e-7
    if abs(a - b) < 1e-4:
        return
    fd_a = (eta(a + h, b) - eta(a - h, b)) / (2 * h)
    assert eta_partial_a(a, b) == pytest.approx(fd_a, rel=1e-4, abs=1e-5)
    if 1e-4 < b < 1 - 1e-4:
        fd_b = (eta(a, b + h) - eta(a, b - h)) / (2 * h)
        assert eta_partial_b(a, b) == pytest.approx(fd_b, rel=1e-4, abs=1e-5)
    (d1a, d1b), (d2a, d2b) = eta_split_partials(a, b)
    f1 = lambda x, y: 1 - y / x
    f2 = lambda x, y: 1 - (1 - y) / (1 - x)
    assert d1a == pytest.approx((f1(a + h, b) - f1(a - h, b)) / (2 * h), rel=1e-4, abs=1e-5)
    assert d2a == pytest.approx((f2(a + h, b) - f2(a - h, b)) / (2 * h), rel=1e-4, abs=1e-5)
    assert d1b == pytest.approx(-1 / a) and d2b == pytest.approx(1 / (1 - a))


def test_psi_bound_examples():
    assert psi_deriv_bound(AffinePair(0.1, 1.0, 0.5, 0.0), 1.0, Side.LEFT) == pytest.approx(2.0)
    assert psi_deriv_bound(AffinePair(0.3, 0.5, 0.3, 0.5), 1.0, Side.EQUAL) == 0.0


def test_psi_bound_hypotheses():
    with pytest.raises(HypothesisViolation):
        psi_deriv_bound(AffinePair(0.1, -1.0, 0.5, 0.0), 0.5, Side.LEFT)
    with pytest.raises(HypothesisViolation):
        psi_deriv_bound(AffinePair(0.1, 1.0, 0.5, 0.3), 0.5, Side.EQUAL)
    with pytest.raises(DomainError):
        psi_deriv_bound(AffinePair(0.1, 1.0, 0.5, 0.3), 1.5, Side.LEFT)


def test_affine_pair_sides():
    p = AffinePair(0.0, 1.0, 0.5, 0.0)
    assert p.crossing() == pytest.approx(0.5)
    assert p.side_of(0.2) is Side.LEFT and p.side_of(0.8) is Side.RIGHT
    assert AffinePair(0, 1, 0.5, 1).crossing() is None

import math

import pytest
from hypothesis import given, strategies as st

from lanemdp import success_prob

lengths = st.floats(min_value=0.0, max_value=1e4, allow_nan=False)
alphas = st.floats(min_value=1e-4, max_value=1.0)


def test_zero_length_never_succeeds():
    assert success_prob(0.01, 0.0) == 0.0


def test_mean_free_length():
    assert success_prob(0.01, 100.0) == pytest.approx(0.6321206, abs=1e-7)
    assert success_prob(0.01, 100.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)


def test_two_halves_compose_to_the_whole():
    f50 = success_prob(0.01, 50.0)
    assert abs(f50 + (1 - f50) * f50 - success_prob(0.01, 100.0)) <= 1e-12


@given(alphas, lengths, lengths)
def test_partition_invariance(a, l1, l2):
    f1 = success_prob(a, l1)
    assert abs(success_prob(a, l1 + l2) - (f1 + (1 - f1) * success_prob(a, l2))) <= 1e-12


@given(alphas, st.floats(min_value=1e-9, max_value=1e4))
def test_below_linear_bound(a, l):
    assert success_prob(a, l) < a * l


@given(alphas, lengths, lengths)
def test_nondecreasing_and_in_unit_interval(a, l1, l2):
    lo, hi = sorted((l1, l2))
    # rounds to exactly 1.0 once alpha * l exceeds ~37
    assert 0.0 <= success_prob(a, lo) <= success_prob(a, hi) <= 1.0


def test_strictly_increasing_on_small_lengths():
    vals = [success_prob(0.01, l) for l in (0.5, 1, 10, 100, 1000)]
    assert vals == sorted(vals) and len(set(vals)) == len(vals)


def test_tends_to_one():
    assert success_prob(0.01, 1e9 / 0.01) > 1 - 1e-9


@pytest.mark.parametrize("alpha, length", [(0.0, 1.0), (-1.0, 1.0), (0.01, -1.0)])
def test_domain_errors(alpha, length):
    with pytest.raises(ValueError):
        success_prob(alpha, length)

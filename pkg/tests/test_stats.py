from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from libra.stats import (
    InvalidInputError,
    binomial_z,
    improvement_from_counts,
    improvement_ratio,
    invocation_z,
    logical_error_rate,
    logical_error_rate_sigma,
    suppression_ratio,
)


def test_ler_fixed_points():
    assert logical_error_rate(0, 100, 5) == 0.0
    assert logical_error_rate(50, 100, 1) == 0.5


def test_ler_inverse_at_point_one():
    # 1/2 (1 - (1 - 0.2)^2) = 0.18 shot failure rate for eps = 0.1 over two rounds
    assert logical_error_rate(18, 100, 2) == pytest.approx(0.1, abs=1e-12)


def test_ler_single_round_is_fraction():
    assert logical_error_rate(7, 1000, 1) == pytest.approx(0.007)


def test_ler_clamps_above_half():
    with pytest.warns(RuntimeWarning):
        assert logical_error_rate(80, 100, 3) == 0.5


@pytest.mark.parametrize("args", [(0, 0, 1), (1, 10, 0), (11, 10, 1), (-1, 10, 1)])
def test_ler_invalid(args):
    with pytest.raises(InvalidInputError):
        logical_error_rate(*args)


@given(st.integers(1, 10_000), st.integers(1, 200), st.data())
def test_ler_inverts_shot_formula(n, r, data):
    nf = data.draw(st.integers(0, n // 2))
    eps = logical_error_rate(nf, n, r)
    assert 0.0 <= eps <= 0.5
    assert 0.5 * (1 - (1 - 2 * eps) ** r) == pytest.approx(nf / n, abs=1e-9)


def test_ler_sigma_single_round_is_binomial():
    assert logical_error_rate_sigma(10, 1000, 1) == pytest.approx(math.sqrt(0.01 * 0.99 / 1000))


def test_improvement_ratio_arithmetic():
    assert improvement_ratio(2e-3, 1e-3) == pytest.approx(2.0)
    assert improvement_ratio(3e-4, 3e-4) == 1.0
    with pytest.raises(InvalidInputError):
        improvement_ratio(1e-3, 0.0)


def test_improvement_zero_decoder_failures_flagged():
    r = improvement_from_counts(10, 0, 1000, 1)
    assert r.lower_bound
    assert r.value == pytest.approx(10.0)
    r2 = improvement_from_counts(10, 5, 1000, 1)
    assert not r2.lower_bound and r2.value == pytest.approx(2.0)
    assert r2.sigma > 0


def test_improvement_undefined_without_baseline_failures():
    r = improvement_from_counts(0, 0, 100, 1)
    assert math.isnan(r.value)


def test_lambda_examples():
    assert suppression_ratio(1e-3, 1e-7, 3, 11) == pytest.approx(10.0)
    assert suppression_ratio(4e-5, 4e-5, 9, 11) == 1.0


def test_lambda_exponents():
    # ratio 16 across the distance steps 3->11, 7->11, 9->11
    assert suppression_ratio(16.0, 1.0, 3, 11) == pytest.approx(16 ** 0.25)
    assert suppression_ratio(16.0, 1.0, 7, 11) == pytest.approx(16 ** 0.5)
    assert suppression_ratio(16.0, 1.0, 9, 11) == pytest.approx(16.0)


def test_lambda_invalid():
    with pytest.raises(InvalidInputError):
        suppression_ratio(0.0, 1e-3, 3, 5)
    with pytest.raises(InvalidInputError):
        suppression_ratio(1e-3, 1e-4, 5, 5)


def test_z_scores():
    assert binomial_z(0, 0, 100) == 0.0
    assert binomial_z(120, 80, 10_000) > 2.0
    assert invocation_z(0, 10, 0, 10) is None
    assert invocation_z(400, 10_000, 100, 10_000) > 10

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqpa.losses import (
    as_label,
    as_prob,
    cumulative_loss,
    log_loss,
    log_sum_exp,
    pointwise_regret,
)


def test_log_loss_basic_values():
    assert log_loss(0.5, 1) == pytest.approx(math.log(2))
    assert log_loss(0.5, 0) == pytest.approx(math.log(2))
    assert log_loss(0.9, 1) == pytest.approx(-math.log(0.9))
    assert log_loss(0.9, 0) == pytest.approx(-math.log(0.1))


def test_log_loss_degenerate_cases():
    assert log_loss(1.0, 1) == 0.0
    assert log_loss(0.0, 0) == 0.0
    assert log_loss(0.0, 1) == math.inf
    assert log_loss(1.0, 0) == math.inf


def test_as_prob_rejects_out_of_range():
    for bad in (-0.1, 1.1, math.nan):
        with pytest.raises(ValueError):
            as_prob(bad)


def test_as_label_rejects_non_binary():
    with pytest.raises(ValueError):
        as_label(2)
    with pytest.raises(ValueError):
        as_label(0.5)


@given(st.floats(min_value=1e-12, max_value=1 - 1e-12),
       st.integers(min_value=0, max_value=1))
def test_log_loss_nonnegative(p, y):
    assert log_loss(p, y) >= 0.0


def test_cumulative_loss_matches_sum():
    preds = [0.3, 0.7, 0.5]
    labels = [0, 1, 1]
    expected = sum(log_loss(p, y) for p, y in zip(preds, labels))
    assert cumulative_loss(preds, labels) == pytest.approx(expected)


def test_cumulative_loss_length_mismatch():
    with pytest.raises(ValueError):
        cumulative_loss([0.5], [1, 0])


def test_log_sum_exp_exact_small():
    v = np.log([0.2, 0.3, 0.5])
    assert log_sum_exp(v) == pytest.approx(0.0, abs=1e-12)


def test_log_sum_exp_all_neg_inf():
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf


def test_log_sum_exp_empty_raises():
    with pytest.raises(ValueError):
        log_sum_exp([])


@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=8))
def test_log_sum_exp_dominates_max(v):
    out = log_sum_exp(v)
    assert out >= max(v) - 1e-12
    # permutation invariance
    assert log_sum_exp(v[::-1]) == pytest.approx(out, abs=1e-9)


def test_pointwise_regret_inf_minus_inf():
    # both sides infinite: regret defined as zero
    assert pointwise_regret(math.inf, math.inf) == 0.0
    assert pointwise_regret(3.0, 1.0) == pytest.approx(2.0)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqpa.experts import FiniteStaticFamily, glm_family
from seqpa.losses import cumulative_loss, log_loss
from seqpa.predictors import (
    AllExpertsRuledOut,
    MixturePredictor,
    Transcript,
    continuous_bayes,
    nml_predict,
    smooth_truncate,
)
from seqpa.shtarkov import FiniteMaxOracle, minimax_value


@given(st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=1e-6, max_value=0.5))
def test_smooth_truncate_range(g, alpha):
    out = smooth_truncate(g, alpha)
    lo = alpha / (1 + 2 * alpha)
    hi = (1 + alpha) / (1 + 2 * alpha)
    assert lo - 1e-12 <= out <= hi + 1e-12


def test_smooth_truncate_fixed_point():
    assert smooth_truncate(0.5, 0.3) == pytest.approx(0.5)


def _run_mixture(family, labels, truncation=None):
    pred = MixturePredictor(family, truncation=truncation)
    T = len(labels)
    features = np.zeros((T, 1))
    total = 0.0
    for t, y in enumerate(labels):
        yhat = pred.step(features[t])
        total += log_loss(yhat, y)
        pred.update(y)
    return pred, total


def test_mixture_weights_track_expert_losses():
    fam = FiniteStaticFamily(np.array([[0.2], [0.6], [0.9]]))
    labels = [1, 0, 1, 1, 0]
    pred, _ = _run_mixture(fam, labels)
    for i, p in enumerate([0.2, 0.6, 0.9]):
        expected = -cumulative_loss([p] * len(labels), labels)
        assert pred.log_weights[i] == pytest.approx(expected, abs=1e-10)


def test_mixture_loss_bounded_by_mixture_mass():
    # cumulative loss <= -log mixture mass (Jensen), hence <= ln n + best loss
    fam = FiniteStaticFamily(np.array([[0.3], [0.7]]))
    labels = [1, 1, 0, 1, 0, 0, 1]
    pred, total = _run_mixture(fam, labels)
    assert total <= -pred.log_mixture_mass() + 1e-10
    best = min(cumulative_loss([p] * len(labels), labels) for p in (0.3, 0.7))
    assert total - best <= math.log(2) + 1e-10


def test_mixture_truncation_keeps_weights_finite():
    fam = FiniteStaticFamily(np.array([[0.0], [1.0]]))
    pred, total = _run_mixture(fam, [1, 0, 1], truncation=0.1)
    assert np.all(np.isfinite(pred.log_weights))
    assert math.isfinite(total)


def test_mixture_all_experts_ruled_out():
    fam = FiniteStaticFamily(np.array([[0.0]]))
    pred = MixturePredictor(fam)
    pred.step(np.zeros(1))
    pred.update(1)  # the only expert placed zero mass on y=1
    with pytest.raises(AllExpertsRuledOut):
        pred.step(np.zeros(1))


def test_mixture_step_update_alternation():
    fam = FiniteStaticFamily(np.array([[0.5]]))
    pred = MixturePredictor(fam)
    with pytest.raises(RuntimeError):
        pred.update(1)
    pred.step(np.zeros(1))
    with pytest.raises(RuntimeError):
        pred.step(np.zeros(1))


def test_transcript_append_and_csv():
    tr = Transcript(features=[np.array([0.5])])
    tr.append(0.5, 1)
    assert tr.cumulative_loss == pytest.approx(math.log(2))
    text = tr.to_csv_string()
    lines = text.strip().split("\n")
    assert lines[0] == "t,x,y,yhat,step_loss,cum_loss"
    assert lines[1].startswith("1,0.5,1,0.5,")


def test_continuous_bayes_respects_regret_bound_small():
    T, d, R, C = 16, 1, 1.0, 0.25
    fam = glm_family(d=d, R=R)
    pred = continuous_bayes(fam, T=T, hessian_bound=C)
    rng = np.random.default_rng(7)
    features = rng.uniform(-1, 1, (T, d))
    total = 0.0
    labels = []
    for t in range(T):
        yhat = pred.step(features[t])
        y = 0 if yhat > 0.5 else 1  # greedy adversary
        total += log_loss(yhat, y)
        labels.append(y)
        pred.update(y)
    from seqpa.experts import best_in_hindsight
    _, best = best_in_hindsight(fam, features, labels)
    bound = (d / 2) * math.log(2 * C * R * R * T / d + 2) + d / 2 + math.log(2)
    assert total - best <= bound + 0.1


def test_empirical_hessian_refuses_bad_constant():
    from seqpa.predictors import empirical_hessian_bound
    fam = glm_family(d=1, R=1.0)
    est = empirical_hessian_bound(fam)
    assert est <= 0.25 * 1.01
    with pytest.raises(ValueError):
        continuous_bayes(fam, T=8, hessian_bound=0.01)


def test_nml_equalizer_small():
    fam = FiniteStaticFamily(np.array([[0.2], [0.7]]))
    T = 4
    oracle = FiniteMaxOracle(fam, np.zeros((T, 1)))
    nml = nml_predict(oracle, T)
    regrets = []
    for idx in range(2 ** T):
        labels = [(idx >> (T - 1 - t)) & 1 for t in range(T)]
        preds = nml.run(labels)
        reg = cumulative_loss(preds, labels) - (-oracle.log_sup(labels))
        regrets.append(reg)
    regrets = np.array(regrets)
    np.testing.assert_allclose(regrets, nml.regret, atol=1e-9)
    assert nml.regret == pytest.approx(minimax_value(oracle, T).root, abs=1e-12)


def test_nml_predictions_sum_to_one():
    fam = FiniteStaticFamily(np.array([[0.3], [0.8]]))
    oracle = FiniteMaxOracle(fam, np.zeros((3, 1)))
    nml = nml_predict(oracle, 3)
    p = nml.predict([])
    assert 0.0 <= p <= 1.0
    p01 = nml.predict([0])
    p11 = nml.predict([1])
    assert 0.0 <= p01 <= 1.0 and 0.0 <= p11 <= 1.0

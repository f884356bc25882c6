import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from freqreg.classify import REGULARIZER, classify_high_load, matching_envelope
from freqreg.infotheory import ratio_entropy
from freqreg.learners import (
    LearnerModel,
    load_mix,
    output_distribution,
    production_probability,
    respond,
    simulate_population,
)
from freqreg.markov import fit_transition_matrix, stationary_distribution, stationary_regularity
from freqreg.trials import entropy_change, transition_pairs

SIX = (5, 6, 7, 8, 9, 10)
gammas = st.floats(0.05, 50)


def binom_pmf(n, p):
    return np.array([math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)])


def test_matcher_is_binomial_sampling():
    rng = np.random.default_rng(12)
    out = respond(LearnerModel(1.0), 6, rng, size=100_000)
    observed = np.bincount(out, minlength=11)
    expected = binom_pmf(10, 0.6) * 100_000
    # pool the sparse low tail so every expected count is >= 5
    obs = np.concatenate([[observed[:2].sum()], observed[2:]])
    exp = np.concatenate([[expected[:2].sum()], expected[2:]])
    assert chisquare(obs, exp).pvalue > 0.001


@given(gammas)
def test_fixed_points(gamma):
    m = LearnerModel(gamma)
    rng = np.random.default_rng(0)
    assert np.all(respond(m, 10, rng, size=200) == 10)
    assert np.all(respond(m, 0, rng, size=200) == 0)


def test_large_gamma_limit():
    m = LearnerModel(1e6)
    assert np.all(respond(m, 7, np.random.default_rng(1), size=1000) == 10)
    assert production_probability(0.7, 1e6) == 1.0


@given(gammas, st.integers(0, 10))
def test_output_distribution_mirrors(gamma, i):
    m = LearnerModel(gamma)
    assert np.allclose(output_distribution(m, i), output_distribution(m, 10 - i)[::-1], atol=1e-12)


@given(st.floats(0, 1))
def test_gamma_one_is_identity(p):
    assert production_probability(p, 1.0) == p


@given(st.floats(0.01, 0.49), st.floats(1.01, 20))
def test_gamma_direction(p, gamma):
    assert production_probability(p, gamma) < p < production_probability(p, 1 / gamma)


def test_invalid_models():
    for g in (0, -1, float("inf"), float("nan")):
        with pytest.raises(ValueError):
            LearnerModel(g)
    with pytest.raises(ValueError):
        respond(LearnerModel(), 11)


def test_respond_seeded_by_model():
    m = LearnerModel(1.0, seed=5)
    assert respond(m, 7) == respond(m, 7)


def test_matcher_population_mean_change():
    recs = simulate_population([(LearnerModel(1.0), 1.0)], SIX, participants=500, seed=4)
    changes = np.array([entropy_change(p) for r in recs for p in r.pairs])
    h = np.array([ratio_entropy(k, 10) for k in range(11)])
    means, variances = [], []
    for i in SIX:
        pmf = binom_pmf(10, i / 10)
        mu = float(pmf @ h) - ratio_entropy(i, 10)
        means.append(mu)
        variances.append(float(pmf @ (h - ratio_entropy(i, 10) - mu) ** 2))
    expected = np.mean(means)
    # six independent strata of 500 pairs each
    sigma = math.sqrt(sum(v / 500 for v in variances)) / 6
    assert abs(changes.mean() - expected) < 3 * sigma


def test_regularizer_population_classified():
    env = matching_envelope(SIX, runs=100_000, seed=1)
    recs = simulate_population([(LearnerModel(10.0), 1.0)], SIX, participants=1000, seed=8)
    labels = [classify_high_load(r.pairs, env).label for r in recs]
    assert labels.count(REGULARIZER) / len(labels) >= 0.95


def test_population_structure_and_determinism():
    mix = [(LearnerModel(1.0), 1.0), (LearnerModel(3.0), 2.0)]
    a = simulate_population(mix, SIX, participants=30, seed=2, workers=1)
    b = simulate_population(mix, SIX, participants=30, seed=2, workers=4)
    assert a == b
    assert all(len(r.pairs) == 6 and r.condition.tag == "marbles6" for r in a)
    low = simulate_population(mix, SIX, participants=12, seed=2, load=1, domain="linguistic")
    assert [r.pairs[0].input_majority for r in low] == list(SIX) * 2
    assert all(r.condition.tag == "words1" for r in low)


def test_population_errors():
    with pytest.raises(ValueError):
        simulate_population([(LearnerModel(), 1.0)], participants=0)
    with pytest.raises(ValueError):
        simulate_population([])
    with pytest.raises(ValueError):
        simulate_population([(LearnerModel(), 0.0)])


def test_regularizers_have_lower_stationary_regularity():
    for seed in range(3):
        reg = {}
        for g in (1.0, 3.0):
            recs = simulate_population([(LearnerModel(g), 1.0)], SIX, participants=100, seed=seed)
            reg[g] = stationary_regularity(stationary_distribution(fit_transition_matrix(transition_pairs(recs))))
        assert reg[3.0] < reg[1.0]


def test_load_mix(tmp_path):
    p = tmp_path / "mix.json"
    p.write_text('[{"gamma": 1, "weight": 3}, {"gamma": 2.5}]')
    mix = load_mix(p)
    assert [(m.gamma, w) for m, w in mix] == [(1.0, 3.0), (2.5, 1.0)]
    p.write_text('{"learners": [{"gamma": 0.5, "weight": 1}]}')
    assert load_mix(p)[0][0].gamma == 0.5
    p.write_text('[{"weight": 1}]')
    with pytest.raises(ValueError, match="learner #0"):
        load_mix(p)

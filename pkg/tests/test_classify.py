import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import beta

from freqreg.classify import (
    MATCHER,
    REGULARIZER,
    VARIABILIZER,
    classify_high_load,
    classify_low_load,
    classify_participant,
    clopper_pearson,
    matching_envelope,
    output_set_entropy,
    simulate_matching_entropies,
)
from freqreg.infotheory import ratio_entropy
from freqreg.trials import Condition, ParticipantRecord, RatioPair

SIX = (5, 6, 7, 8, 9, 10)


def beta_oracle(k, n, conf=0.95):
    a = 1 - conf
    lo = 0.0 if k == 0 else beta.ppf(a / 2, k, n - k + 1)
    hi = 1.0 if k == n else beta.ppf(1 - a / 2, k + 1, n - k)
    return lo, hi


def exact_set_entropy_distribution(input_set, n=10):
    """Exact distribution of the mean per-context entropy under binomial sampling."""
    h = [ratio_entropy(k, n) for k in range(n + 1)]
    dist = {0.0: 1.0}
    for x in input_set:
        p = x / n
        pmf = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
        nxt = {}
        for v, w in dist.items():
            for k, pk in enumerate(pmf):
                if pk:
                    key = round(v + h[k], 12)
                    nxt[key] = nxt.get(key, 0.0) + w * pk
        dist = nxt
    vals = np.array(sorted(dist)) / len(input_set)
    probs = np.array([dist[v] for v in sorted(dist)])
    return vals, probs


def exact_quantile(vals, probs, q):
    return vals[np.searchsorted(np.cumsum(probs), q)]


@pytest.mark.parametrize("k, n", [(0, 1), (1, 1)] + [(k, 10) for k in range(11)] + [(k, 37) for k in (0, 1, 9, 18, 36, 37)])
def test_clopper_pearson_matches_beta_quantiles(k, n):
    iv = clopper_pearson(k, n)
    lo, hi = beta_oracle(k, n)
    assert iv.lower == pytest.approx(lo, abs=1e-9)
    assert iv.upper == pytest.approx(hi, abs=1e-9)
    assert iv.lower <= k / n <= iv.upper
    assert (iv.lower == 0) == (k == 0)
    assert (iv.upper == 1) == (k == n)


@pytest.mark.parametrize(
    "k, lo, hi", [(5, 0.187, 0.813), (10, 0.692, 1.0), (0, 0.0, 0.308), (8, 0.444, 0.975)]
)
def test_clopper_pearson_examples(k, lo, hi):
    iv = clopper_pearson(k, 10)
    assert (iv.lower, iv.upper) == pytest.approx((lo, hi), abs=5e-4)


def test_clopper_pearson_other_confidence():
    iv = clopper_pearson(3, 20, 0.9)
    assert (iv.lower, iv.upper) == pytest.approx(beta_oracle(3, 20, 0.9), abs=1e-9)


@given(st.integers(1, 60).flatmap(lambda n: st.tuples(st.integers(0, n), st.just(n))))
def test_interval_equivariance(kn):
    k, n = kn
    a = clopper_pearson(k, n)
    b = clopper_pearson(n - k, n)
    assert a.lower == 1 - b.upper
    assert a.upper == 1 - b.lower


def test_coverage_by_enumeration():
    intervals = [clopper_pearson(k, 10) for k in range(11)]
    for p in np.arange(5, 11) / 10:
        cover = sum(
            math.comb(10, k) * p**k * (1 - p) ** (10 - k) for k, iv in enumerate(intervals) if iv.contains(p)
        )
        assert cover >= 0.95


@pytest.mark.parametrize("args", [(11, 10), (-1, 10), (3, 0), (3, 10, 1.0)])
def test_clopper_pearson_errors(args):
    with pytest.raises(ValueError):
        clopper_pearson(*args)


def test_envelope_against_exact_distribution():
    env = matching_envelope(SIX, runs=100_000, seed=11)
    vals, probs = exact_set_entropy_distribution(SIX)
    assert env.lower == pytest.approx(exact_quantile(vals, probs, 0.025), abs=0.01)
    assert env.upper == pytest.approx(exact_quantile(vals, probs, 0.975), abs=0.01)
    assert 0 <= env.lower < env.upper <= 1


def test_simulated_entropies_match_conditional_entropy():
    h = simulate_matching_entropies(SIX, 10_000, seed=5)
    rng = np.random.default_rng(0)
    # spot check the lookup-table path against the table-based definition
    from freqreg import _streams

    draws = _streams.stream(5, 0).binomial(10, np.array(SIX) / 10, size=(10_000, 6))
    for r in rng.choice(10_000, 20, replace=False):
        pairs = [RatioPair(10, int(o)) for o in draws[r]]
        assert h[r] == pytest.approx(output_set_entropy(pairs), abs=1e-12)


@given(st.lists(st.integers(0, 10), min_size=6, max_size=6))
def test_output_set_entropy_is_conditional_entropy(outputs):
    from freqreg.infotheory import CooccurrenceTable, conditional_entropy

    table = CooccurrenceTable([[o, 10 - o] for o in outputs])
    assert output_set_entropy(_pairs(outputs)) == pytest.approx(conditional_entropy(table), abs=1e-12)


def test_envelope_all_balanced():
    env = matching_envelope([5] * 6, runs=50_000, seed=2)
    vals, probs = exact_set_entropy_distribution([5] * 6)
    mean = float(np.sum(vals * probs))
    assert mean < 1
    assert env.upper <= 1
    assert env.lower < mean < env.upper
    assert env.lower == pytest.approx(exact_quantile(vals, probs, 0.025), abs=0.01)


def test_envelope_degenerate():
    with pytest.warns(UserWarning, match="zero variance"):
        env = matching_envelope([10] * 6, runs=10_000, seed=0)
    assert (env.lower, env.upper) == (0.0, 0.0)


def test_envelope_monotone_in_confidence():
    a = matching_envelope(SIX, runs=20_000, confidence=0.90, seed=4)
    b = matching_envelope(SIX, runs=20_000, confidence=0.99, seed=4)
    assert b.lower <= a.lower and b.upper >= a.upper


def test_envelope_worker_invariance():
    a = matching_envelope(SIX, runs=60_000, seed=9, workers=1)
    b = matching_envelope(SIX, runs=60_000, seed=9, workers=4)
    assert (a.lower, a.upper) == (b.lower, b.upper)


def test_envelope_requires_runs():
    with pytest.raises(ValueError):
        matching_envelope(SIX, runs=999)


@pytest.mark.parametrize(
    "pair, label",
    [
        (RatioPair(8, 10), REGULARIZER),
        (RatioPair(8, 8), MATCHER),
        (RatioPair(9, 5), VARIABILIZER),
        (RatioPair(7, 3), MATCHER),  # mirror flip: same entropy
        (RatioPair(10, 10), MATCHER),
        (RatioPair(9, 0), REGULARIZER),
    ],
)
def test_low_load_labels(pair, label):
    lab = classify_low_load(pair)
    assert lab.label == label
    assert lab.statistic == pair.output_majority / 10


def test_low_load_interval_must_match():
    with pytest.raises(ValueError):
        classify_low_load(RatioPair(8, 8), clopper_pearson(7, 10))


@pytest.fixture(scope="module")
def envelope():
    return matching_envelope(SIX, runs=100_000, seed=3)


def _pairs(outputs):
    return [RatioPair(i, o) for i, o in zip(SIX, outputs)]


def test_high_load_labels(envelope):
    assert classify_high_load(_pairs([10, 0, 10, 10, 0, 10]), envelope).label == REGULARIZER
    assert classify_high_load(_pairs([5] * 6), envelope).label == VARIABILIZER
    same = classify_high_load(_pairs(SIX), envelope)
    assert same.label == MATCHER
    assert same.statistic == pytest.approx(0.674, abs=5e-4)
    with pytest.raises(ValueError):
        classify_high_load(_pairs(SIX)[:5], envelope)


def test_classify_participant_dispatch(envelope):
    low = ParticipantRecord("a", Condition("linguistic", 1), [RatioPair(8, 10)])
    high = ParticipantRecord("b", Condition("linguistic", 6), _pairs(SIX))
    assert classify_participant(low).label == REGULARIZER
    assert classify_participant(high, envelope).label == MATCHER
    with pytest.raises(ValueError):
        classify_participant(high)

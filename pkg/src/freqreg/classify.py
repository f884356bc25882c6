"""Strategy classification: regularizer, probability matcher, or variabilizer.

Low-load participants produce one ratio; it is compared with the exact
(Clopper-Pearson) interval of what sampling with replacement from the input
would give. High-load participants produce six ratios; their conditional
entropy is compared with a Monte Carlo envelope of simulated probability
matchers.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _streams
from .infotheory import CooccurrenceTable, conditional_entropy, ratio_entropy
from .trials import TRAINING_RATIOS, ParticipantRecord, RatioPair

REGULARIZER = "regularizer"
MATCHER = "matcher"
VARIABILIZER = "variabilizer"

DEFAULT_RUNS = 100_000
_CHUNK = 10_000


@dataclass(frozen=True)
class BinomialInterval:
    lower: float
    upper: float
    confidence: float
    successes: int
    n: int

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


@dataclass(frozen=True)
class EntropyEnvelope:
    lower: float
    upper: float
    confidence: float
    runs: int
    input_set: tuple[int, ...]
    n: int = 10
    seed: int | None = None


@dataclass(frozen=True)
class StrategyLabel:
    label: str
    evidence: BinomialInterval | EntropyEnvelope
    statistic: float


def _upper_tail(k: int, n: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(n, p)."""
    if p <= 0.0:
        return 1.0 if k <= 0 else 0.0
    if p >= 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    lgn = math.lgamma(n + 1)
    return math.fsum(
        math.exp(lgn - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lp + (n - j) * lq)
        for j in range(k, n + 1)
    )


def _lower_bound(k: int, n: int, alpha: float) -> float:
    # smallest p with P(X >= k | p) = alpha/2; the tail grows with p
    if k == 0:
        return 0.0
    target = alpha / 2
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _upper_tail(k, n, mid) < target:
            lo = mid
        else:
            hi = mid
    # snap to a value x with 1 - (1 - x) == x, so mirrored bounds are exact complements
    return 1.0 - (1.0 - 0.5 * (lo + hi))


def clopper_pearson(successes: int, n: int, confidence: float = 0.95) -> BinomialInterval:
    """Exact two-sided binomial interval, by bisection on the binomial tails.

    The upper bound is computed as ``1 - lower(n - successes)`` so that the
    interval is exactly equivariant under relabeling successes and failures.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= successes <= n:
        raise ValueError(f"successes={successes} outside [0, {n}]")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    alpha = 1 - confidence
    lower = _lower_bound(successes, n, alpha)
    upper = 1.0 - _lower_bound(n - successes, n, alpha)
    return BinomialInterval(lower, upper, confidence, successes, n)


def _entropy_lookup(n: int) -> np.ndarray:
    return np.array([ratio_entropy(k, n) for k in range(n + 1)])


def simulate_matching_entropies(
    input_set: Sequence[int], runs: int, seed: int, n: int = 10, workers: int | None = None
) -> np.ndarray:
    """Conditional entropy of ``runs`` simulated probability-matching output sets."""
    probs = np.asarray(input_set, dtype=float) / n
    table = _entropy_lookup(n)

    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        draws = rng.binomial(n, probs, size=(size, probs.size))
        # contexts are equiprobable, so H(V|C) is the mean per-context entropy
        return table[draws].mean(axis=1)

    return np.concatenate(_streams.run_chunks(chunk, runs, seed, chunk=_CHUNK, workers=workers))


def matching_envelope(
    input_set: Sequence[int] = TRAINING_RATIOS,
    runs: int = DEFAULT_RUNS,
    confidence: float = 0.95,
    seed: int = 0,
    n: int = 10,
    workers: int | None = None,
) -> EntropyEnvelope:
    """Central percentile interval of conditional entropy under probability matching."""
    if runs < 10_000:
        raise ValueError(f"runs must be >= 10^4, got {runs}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    input_set = tuple(int(x) for x in input_set)
    if not input_set or any(not 0 <= x <= n for x in input_set):
        raise ValueError(f"input ratios must be counts in [0, {n}]")
    if all(x in (0, n) for x in input_set):
        warnings.warn("input set is fully regular; matching envelope has zero variance", stacklevel=2)
    h = simulate_matching_entropies(input_set, runs, seed, n=n, workers=workers)
    tail = (1 - confidence) / 2 * 100
    lower, upper = np.percentile(h, [tail, 100 - tail])
    return EntropyEnvelope(float(lower), float(upper), confidence, runs, input_set, n, seed)


def classify_low_load(p: RatioPair, interval: BinomialInterval | None = None) -> StrategyLabel:
    """Label a single-ratio response.

    Outputs inside the input's matching interval are matchers. Outside it the
    entropy change decides; an exact mirror of the input (equal entropy) is
    labeled a matcher.
    """
    if interval is None:
        interval = clopper_pearson(p.input_majority, p.n)
    elif interval.successes != p.input_majority or interval.n != p.n:
        raise ValueError("interval was not built from this pair's input ratio")
    freq = p.coded_output / p.n
    if interval.contains(freq):
        label = MATCHER
    else:
        h_in = ratio_entropy(p.input_majority, p.n)
        h_out = ratio_entropy(p.output_majority, p.n)
        if math.isclose(h_out, h_in, rel_tol=0, abs_tol=1e-12):
            label = MATCHER
        else:
            label = REGULARIZER if h_out < h_in else VARIABILIZER
    return StrategyLabel(label, interval, freq)


def output_set_entropy(pairs: Sequence[RatioPair]) -> float:
    """Conditional entropy of a set of output ratios with equiprobable contexts.

    Evaluated exactly as the envelope simulation evaluates it, so a participant
    sitting on an envelope endpoint compares equal to it.
    """
    n = {p.n for p in pairs}
    if len(n) != 1:
        return conditional_entropy(CooccurrenceTable([[p.output_majority / p.n, 1 - p.output_majority / p.n] for p in pairs]))
    counts = np.array([[p.output_majority for p in pairs]])
    return float(_entropy_lookup(n.pop())[counts].mean(axis=1)[0])


def classify_high_load(pairs: Sequence[RatioPair], envelope: EntropyEnvelope) -> StrategyLabel:
    if len(pairs) != 6:
        raise ValueError(f"high-load classification needs 6 pairs, got {len(pairs)}")
    h = output_set_entropy(pairs)
    if h < envelope.lower:
        label = REGULARIZER
    elif h > envelope.upper:
        label = VARIABILIZER
    else:
        label = MATCHER
    return StrategyLabel(label, envelope, h)


def classify_participant(
    record: ParticipantRecord, envelope: EntropyEnvelope | None = None, confidence: float = 0.95
) -> StrategyLabel:
    if len(record.pairs) == 1:
        p = record.pairs[0]
        return classify_low_load(p, clopper_pearson(p.input_majority, p.n, confidence))
    if envelope is None:
        raise ValueError("a matching envelope is required for multi-ratio participants")
    return classify_high_load(record.pairs, envelope)

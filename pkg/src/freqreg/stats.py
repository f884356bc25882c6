"""Percentile bootstrap for means and for stationary regularity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _streams
from .markov import ConvergenceError, matrix_from_counts, stationary_distribution, stationary_regularity, tally

DEFAULT_RESAMPLES = 10_000
_CHUNK = 1_000


@dataclass(frozen=True)
class BootstrapResult:
    point_estimate: float
    lower: float
    upper: float
    resamples: int
    seed: int
    confidence: float = 0.95
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        return {
            "point_estimate": self.point_estimate,
            "lower": self.lower,
            "upper": self.upper,
            "resamples": self.resamples,
            "confidence": self.confidence,
            "seed": self.seed,
        }


def _check(resamples: int, confidence: float) -> None:
    if resamples < 1000:
        raise ValueError(f"resamples must be >= 1000, got {resamples}")
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")


def percentile_interval(samples: np.ndarray, confidence: float) -> tuple[float, float]:
    tail = (1 - confidence) / 2 * 100
    lo, hi = np.percentile(samples, [tail, 100 - tail])
    return float(lo), float(hi)


def bootstrap_mean(
    values: Sequence[float],
    resamples: int = DEFAULT_RESAMPLES,
    confidence: float = 0.95,
    seed: int = 0,
    workers: int | None = None,
) -> BootstrapResult:
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    _check(resamples, confidence)

    def chunk(rng: np.random.Generator, size: int) -> np.ndarray:
        return x[rng.integers(0, x.size, size=(size, x.size))].mean(axis=1)

    means = np.concatenate(_streams.run_chunks(chunk, resamples, seed, chunk=_CHUNK, workers=workers))
    lo, hi = percentile_interval(means, confidence)
    return BootstrapResult(float(x.mean()), lo, hi, resamples, seed, confidence, means)


def bootstrap_stationary(
    pairs: Sequence[tuple[int, int]],
    resamples: int = DEFAULT_RESAMPLES,
    confidence: float = 0.95,
    seed: int = 0,
    *,
    mirror: bool = True,
    epsilon: float | None = None,
    n: int = 10,
    smoothing: str = "counts",
    groups: Sequence[str] | None = None,
    unit: str = "pair",
    workers: int | None = None,
) -> BootstrapResult:
    """Bootstrap interval for stationary regularity.

    Each resample redraws the data with replacement, refits the transition
    matrix with the same options and solves it. ``unit="pair"`` redraws
    individual (input, output) pairs; ``unit="participant"`` redraws whole
    participants, identified by ``groups``.
    """
    if len(pairs) == 0:
        raise ValueError("cannot bootstrap an empty set of pairs")
    _check(resamples, confidence)
    size = n + 1
    arr = np.asarray(pairs, dtype=int).reshape(-1, 2)
    if np.any(arr < 0) or np.any(arr > n):
        raise ValueError(f"pairs must lie in states 0..{n}")

    def solve(counts: np.ndarray) -> float:
        m = matrix_from_counts(counts, epsilon=epsilon, smoothing=smoothing, mirror=mirror)
        return stationary_regularity(stationary_distribution(m))

    point = solve(tally(arr, n=n, mirror=mirror))

    if unit == "pair":
        units = [tally(arr[k : k + 1], n=n, mirror=mirror).ravel() for k in range(len(arr))]
    elif unit == "participant":
        if groups is None or len(groups) != len(arr):
            raise ValueError("participant-level resampling needs one group id per pair")
        ids = list(dict.fromkeys(groups))
        index = {g: j for j, g in enumerate(ids)}
        units = [np.zeros(size * size) for _ in ids]
        for g, row in zip(groups, arr):
            units[index[g]] += tally([tuple(row)], n=n, mirror=mirror).ravel()
    else:
        raise ValueError(f"unit must be 'pair' or 'participant', got {unit!r}")
    unit_counts = np.array(units)
    k = len(unit_counts)

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        draws = rng.integers(0, k, size=(count, k))
        out = np.empty(count)
        for r in range(count):
            counts = np.bincount(draws[r], minlength=k) @ unit_counts
            try:
                out[r] = solve(counts.reshape(size, size))
            except ConvergenceError as e:
                raise RuntimeError(
                    f"stationary solve failed in bootstrap resample {r} (seed {seed}): {e}; "
                    f"tally={counts.reshape(size, size).tolist()}"
                ) from e
        return out

    stats = np.concatenate(_streams.run_chunks(chunk, resamples, seed, chunk=_CHUNK, workers=workers))
    lo, hi = percentile_interval(stats, confidence)
    return BootstrapResult(point, lo, hi, resamples, seed, confidence, stats)

"""Synthetic frequency learners.

A learner with exponent ``gamma`` maps an observed proportion p to

    p' = p**gamma / (p**gamma + (1 - p)**gamma)

and then produces n tokens by sampling Binomial(n, p'). gamma = 1 is sampling
with replacement (probability matching), gamma > 1 sharpens toward the majority
(regularizing) and gamma < 1 flattens toward 1/2 (variabilizing). Both 0 and 1
are fixed points for every gamma.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _streams
from .trials import TRAINING_RATIOS, Condition, ParticipantRecord, RatioPair


@dataclass(frozen=True)
class LearnerModel:
    gamma: float = 1.0
    n: int = 10
    seed: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be finite and > 0, got {self.gamma}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


def production_probability(p: float, gamma: float) -> float:
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    if gamma == 1.0:
        return p
    # log-odds form avoids overflow for large gamma
    z = gamma * (math.log(p) - math.log1p(-p))
    return 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))


def output_distribution(model: LearnerModel, input_count: int) -> np.ndarray:
    """Exact probability of each output count 0..n."""
    n = model.n
    pp = production_probability(input_count / n, model.gamma)
    return np.array([math.comb(n, k) * pp**k * (1 - pp) ** (n - k) for k in range(n + 1)])


def respond(model: LearnerModel, input_count: int, rng: np.random.Generator | None = None, size=None):
    """Sample the output count(s) for one input count."""
    if not 0 <= input_count <= model.n:
        raise ValueError(f"input_count {input_count} outside [0, {model.n}]")
    if rng is None:
        rng = np.random.default_rng(model.seed)
    pp = production_probability(input_count / model.n, model.gamma)
    out = rng.binomial(model.n, pp, size=size)
    return int(out) if size is None else out


def _minority_sequence(rng: np.random.Generator, n: int, minority: int) -> str:
    bits = np.zeros(n, dtype=int)
    bits[rng.choice(n, size=minority, replace=False)] = 1
    return "".join(map(str, bits))


def simulate_population(
    model_mix: Sequence[tuple[LearnerModel, float]],
    inputs: Sequence[int] = TRAINING_RATIOS,
    participants: int = 100,
    seed: int = 0,
    domain: str = "nonlinguistic",
    load: int | None = None,
    workers: int | None = None,
) -> list[ParticipantRecord]:
    """Synthetic participants drawn from a weighted mix of learner models.

    With ``load`` left at ``len(inputs)`` every participant responds to all
    inputs (a high-load session). With ``load=1`` participant k sees only
    ``inputs[k % len(inputs)]``. Participant k draws from stream ``(seed, k)``.
    Observation and production orders are shuffled so the records carry
    sequences.
    """
    if not model_mix:
        raise ValueError("learner mix is empty")
    if participants < 1:
        raise ValueError(f"participants must be >= 1, got {participants}")
    if not inputs:
        raise ValueError("no input ratios given")
    weights = np.array([float(w) for _, w in model_mix])
    if np.any(weights < 0) or not weights.sum() > 0:
        raise ValueError("mix weights must be non-negative with a positive total")
    weights = weights / weights.sum()
    models = [m for m, _ in model_mix]
    load = len(inputs) if load is None else load
    if load not in (1, len(inputs)):
        raise ValueError(f"load must be 1 or len(inputs)={len(inputs)}, got {load}")
    cond = Condition(domain, load)

    def one(k: int) -> ParticipantRecord:
        rng = _streams.stream(seed, k)
        model = models[int(rng.choice(len(models), p=weights))]
        n = model.n
        seen = [inputs[k % len(inputs)]] if load == 1 else list(inputs)
        pairs = []
        for ctx, inp in enumerate(seen, start=1):
            out = respond(model, inp, rng)
            pairs.append(
                RatioPair(
                    input_majority=inp,
                    output_majority=out,
                    n=n,
                    input_sequence=_minority_sequence(rng, n, n - inp),
                    output_sequence=_minority_sequence(rng, n, n - out),
                    context_id=str(ctx if load > 1 else inputs.index(inp) + 1),
                )
            )
        return ParticipantRecord(f"sim{k:06d}", cond, tuple(pairs))

    return _streams.map_ordered(one, range(participants), workers=workers)


def load_mix(path: str | Path, n: int = 10) -> list[tuple[LearnerModel, float]]:
    """Read a learner mix: ``[{"gamma": 1, "weight": 1}, ...]`` or ``{"learners": [...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data.get("learners")
    if not isinstance(data, list) or not data:
        raise ValueError(f"{path}: expected a non-empty list of {{gamma, weight}} entries")
    mix = []
    for i, entry in enumerate(data):
        try:
            mix.append((LearnerModel(float(entry["gamma"]), n=n), float(entry.get("weight", 1.0))))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"{path}: learner #{i}: {e}") from None
    return mix

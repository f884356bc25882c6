"""Minority-variant primacy in an observation sequence.

The score treats the sequence as a lever balanced at its centre with a unit
weight at every minority token, and standardizes the net torque by its largest
possible value for the given minority count. +1 means every minority token
came first; -1 means every one came last.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .infotheory import ratio_entropy
from .trials import RatioPair


class UndefinedScoreError(ValueError):
    pass


@dataclass(frozen=True)
class PrimacyScore:
    value: float
    m: int
    n: int

    def __float__(self) -> float:
        return self.value


def _bits(seq: str | Sequence[int]) -> list[int]:
    if isinstance(seq, str):
        if set(seq) - {"0", "1"}:
            raise ValueError(f"sequence must contain only '0' and '1', got {seq!r}")
        return [int(c) for c in seq]
    bits = [int(b) for b in seq]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("sequence must contain only 0 and 1")
    return bits


def primacy_score(seq: str | Sequence[int]) -> PrimacyScore:
    """Standardized net torque of the 1s (minority tokens) in ``seq``.

    >>> primacy_score("1110000000").value
    1.0
    """
    w = _bits(seq)
    n = len(w)
    m = sum(w)
    if n < 2 or m == 0 or m == n:
        raise UndefinedScoreError(f"primacy needs both symbols present; got m={m} of N={n}")
    # doubled to stay in integers: sum w_d (2d - (N+1)), normaliser m(N-m)
    torque2 = sum(2 * d - (n + 1) for d, b in enumerate(w, start=1) if b)
    return PrimacyScore(value=-torque2 / (m * (n - m)), m=m, n=n)


def regularization_type(p: RatioPair) -> str:
    """``"majority"``, ``"minority"`` or ``"none"`` for one input/output pair."""
    if ratio_entropy(p.output_majority, p.n) >= ratio_entropy(p.input_majority, p.n):
        return "none"
    return "majority" if p.coded_output > p.input_majority else "minority"

"""Plug-in entropy and mutual information of discrete variant/context mappings.

All quantities are in bits. Weights may be raw counts or probabilities; they are
normalized internally, and ``0 * log2(0)`` is taken to be 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class InvalidDistributionError(ValueError):
    pass


class InvalidTableError(ValueError):
    pass


def _entropy_of(weights: np.ndarray) -> float:
    total = weights.sum()
    p = weights / total
    p = p[p > 0]
    h = -float(np.sum(p * np.log2(p)))
    return h if h > 0.0 else 0.0


def shannon_entropy(weights: Sequence[float]) -> float:
    """Shannon entropy, in bits, of a list of non-negative weights.

    >>> round(shannon_entropy([0.3, 0.3, 0.2, 0.2]), 3)
    1.971
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise InvalidDistributionError("distribution must be a non-empty 1-d list of weights")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidDistributionError(f"weights must be finite and non-negative, got {list(w)}")
    if not np.any(w > 0):
        raise InvalidDistributionError("at least one weight must be strictly positive")
    return _entropy_of(w)


def ratio_entropy(x: int, n: int) -> float:
    """Entropy of the two-variant ratio ``x:(n-x)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0 <= x <= n:
        raise ValueError(f"count {x} outside [0, {n}]")
    if x == 0 or x == n:
        return 0.0
    p = x / n
    q = (n - x) / n
    return -(p * math.log2(p) + q * math.log2(q))


@dataclass(frozen=True)
class CooccurrenceTable:
    """Context-by-variant co-occurrence counts (rows are contexts, columns variants)."""

    counts: np.ndarray
    row_labels: tuple[str, ...] = field(default=())
    column_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        c = np.array(self.counts, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise InvalidTableError("table must be a non-empty 2-d matrix")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise InvalidTableError("table counts must be finite and non-negative")
        if not c.sum() > 0:
            raise InvalidTableError("table total count must be strictly positive")
        rows = tuple(self.row_labels) or tuple(f"c{j + 1}" for j in range(c.shape[0]))
        cols = tuple(self.column_labels) or tuple(f"v{i + 1}" for i in range(c.shape[1]))
        if len(rows) != c.shape[0] or len(cols) != c.shape[1]:
            raise InvalidTableError(
                f"label lengths ({len(rows)}, {len(cols)}) do not match table shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "column_labels", cols)

    @classmethod
    def from_conditional(cls, context_probs: Sequence[float], rows: Sequence[Sequence[float]]):
        """Build the joint table ``p(c) * p(v|c)`` from a context marginal and per-context rows."""
        pc = np.asarray(context_probs, dtype=float)
        r = np.asarray(rows, dtype=float)
        r = r / r.sum(axis=1, keepdims=True)
        return cls(pc[:, None] * r)

    @classmethod
    def from_csv(cls, path: str | Path) -> "CooccurrenceTable":
        """Read a table whose header is ``context,<variant labels...>``."""
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if len(rows) < 2:
            raise InvalidTableError(f"{path}: need a header and at least one context row")
        header, body = rows[0], rows[1:]
        counts = []
        for lineno, r in enumerate(body, start=2):
            if len(r) != len(header):
                raise InvalidTableError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
            try:
                counts.append([float(x) for x in r[1:]])
            except ValueError as e:
                raise InvalidTableError(f"{path}:{lineno}: {e}") from None
        return cls(np.array(counts), tuple(r[0] for r in body), tuple(header[1:]))

    @property
    def joint(self) -> np.ndarray:
        return self.counts / self.counts.sum()


@dataclass(frozen=True)
class EntropyProfile:
    h_v: float
    h_c: float
    h_v_given_c: float
    h_c_given_v: float
    mi: float
    h_joint: float

    def as_dict(self) -> dict[str, float]:
        return {
            "H(V)": self.h_v,
            "H(C)": self.h_c,
            "H(V|C)": self.h_v_given_c,
            "H(C|V)": self.h_c_given_v,
            "I(V;C)": self.mi,
            "H(V,C)": self.h_joint,
        }


def _weighted_row_entropy(counts: np.ndarray) -> float:
    totals = counts.sum(axis=1)
    grand = totals.sum()
    h = 0.0
    for row, t in zip(counts, totals):
        if t > 0:
            h += (t / grand) * _entropy_of(row)
    return float(h)


def _as_table(t) -> CooccurrenceTable:
    return t if isinstance(t, CooccurrenceTable) else CooccurrenceTable(np.asarray(t, dtype=float))


def conditional_entropy(t: CooccurrenceTable) -> float:
    """H(V|C): entropy of the columns given the row, weighted by row mass."""
    return _weighted_row_entropy(_as_table(t).counts)


def joint_entropy(t: CooccurrenceTable) -> float:
    return _entropy_of(_as_table(t).counts.ravel())


def entropy_profile(t: CooccurrenceTable) -> EntropyProfile:
    c = _as_table(t).counts
    h_v = _entropy_of(c.sum(axis=0))
    h_c = _entropy_of(c.sum(axis=1))
    h_v_given_c = _weighted_row_entropy(c)
    h_c_given_v = _weighted_row_entropy(c.T)
    return EntropyProfile(
        h_v=h_v,
        h_c=h_c,
        h_v_given_c=h_v_given_c,
        h_c_given_v=h_c_given_v,
        mi=h_v - h_v_given_c,
        h_joint=_entropy_of(c.ravel()),
    )

"""Iterated learning as a Markov chain over ratio states.

State ``i`` is the output count of the majority-coded variant, so for n=10
trials the states run 0:10, 1:9, ..., 10:0. Transition matrices are tallied
from (input, output) pairs, optionally mirrored, additively smoothed and
row-normalized.
"""
from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .infotheory import ratio_entropy

SMOOTHING_MODES = ("counts", "probabilities")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def _normalize_rows(a: np.ndarray) -> np.ndarray:
    # fsum gives a correctly rounded, order-independent row total, so mirrored
    # rows normalize to exactly mirrored probabilities
    totals = np.array([math.fsum(row) for row in a])
    return a / totals[:, None]


@dataclass(frozen=True)
class TransitionMatrix:
    q: np.ndarray
    epsilon: float | None = None
    counts: np.ndarray | None = None
    mirror: bool = False
    smoothing: str = "counts"
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 2:
            raise ValueError(f"transition matrix must be square with >= 2 states, got shape {q.shape}")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValueError("transition probabilities must be finite and non-negative")
        bad = np.abs(q.sum(axis=1) - 1.0) > 1e-12
        if np.any(bad):
            raise ValueError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        if self.counts is not None:
            c = np.array(self.counts, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "counts", c)

    @property
    def size(self) -> int:
        return self.q.shape[0]

    @property
    def n(self) -> int:
        return self.size - 1

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.q > 0))

    @property
    def mirror_symmetric(self) -> bool:
        return bool(np.array_equal(self.q, self.q[::-1, ::-1]))


@dataclass(frozen=True)
class StationaryDistribution:
    probabilities: np.ndarray
    residual: float
    iterations: int = 0

    def __post_init__(self):
        self.probabilities.setflags(write=False)


def tally(pairs: Iterable[tuple[int, int]], n: int = 10, mirror: bool = True) -> np.ndarray:
    counts = np.zeros((n + 1, n + 1))
    for i, o in pairs:
        i, o = int(i), int(o)
        if not (0 <= i <= n and 0 <= o <= n):
            raise ValueError(f"pair ({i}, {o}) outside states 0..{n}")
        counts[i, o] += 1
        if mirror:
            counts[n - i, n - o] += 1
    return counts


def matrix_from_counts(
    counts: np.ndarray,
    epsilon: float | None = None,
    smoothing: str = "counts",
    mirror: bool = False,
) -> TransitionMatrix:
    """Smooth and row-normalize a tally matrix.

    ``smoothing="counts"`` adds epsilon to every tally before normalizing;
    ``"probabilities"`` normalizes observed rows first, then adds epsilon and
    renormalizes.
    """
    counts = np.asarray(counts, dtype=float)
    size = counts.shape[0]
    eps = 1.0 / size**2 if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ValueError(f"epsilon must be > 0, got {eps}")
    if smoothing == "counts":
        q = _normalize_rows(counts + eps)
    elif smoothing == "probabilities":
        totals = np.array([math.fsum(r) for r in counts])
        p = np.divide(counts, totals[:, None], out=np.zeros_like(counts), where=totals[:, None] > 0)
        q = _normalize_rows(p + eps)
    else:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}, got {smoothing!r}")
    return TransitionMatrix(q, epsilon=eps, counts=counts, mirror=mirror, smoothing=smoothing)


def fit_transition_matrix(
    pairs: Iterable[tuple[int, int]],
    mirror: bool = True,
    epsilon: float | None = None,
    n: int = 10,
    smoothing: str = "counts",
) -> TransitionMatrix:
    """Estimate Q from (input state, output state) pairs.

    With ``mirror`` each pair (i, o) also counts as (n-i, n-o), filling the
    minority-coded rows. Epsilon defaults to 1/(n+1)^2. No data at all gives
    the uniform matrix.
    """
    counts = tally(pairs, n=n, mirror=mirror)
    return matrix_from_counts(counts, epsilon=epsilon, smoothing=smoothing, mirror=mirror)


def _as_q(m) -> np.ndarray:
    return m.q if isinstance(m, TransitionMatrix) else np.asarray(m, dtype=float)


def nullspace_stationary(m) -> np.ndarray:
    """Stationary vector from the null space of (I - Q^T); cross-check oracle."""
    q = _as_q(m)
    a = np.eye(q.shape[0]) - q.T
    _, _, vt = np.linalg.svd(a)
    v = vt[-1]
    return v / v.sum()


def stationary_distribution(
    m,
    tolerance: float = 1e-12,
    max_iterations: int = 10**6,
    method: str = "power",
) -> StationaryDistribution:
    """Solve s Q = s by power iteration.

    Iterates are advanced through repeated squaring of Q (s Q, s Q^2, s Q^4,
    ...), so a chain needing t generations costs about log2(t) matrix products.
    Convergence is declared when max |s Q - s| < tolerance; ``max_iterations``
    caps the number of generations advanced. ``method="nullspace"`` uses the
    dense oracle instead and is meant for tests.
    """
    q = _as_q(m)
    size = q.shape[0]
    if method == "nullspace":
        s = nullspace_stationary(q)
        return StationaryDistribution(s, float(np.max(np.abs(s @ q - s))), 0)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")

    s = np.full(size, 1.0 / size)
    power = q.copy()
    step = 1
    done = 0
    residual = float(np.max(np.abs(s @ q - s)))
    while residual >= tolerance:
        if done + step > max_iterations:
            raise ConvergenceError(
                f"no convergence after {done} generations (residual {residual:.3e})", residual
            )
        s = s @ power
        s /= s.sum()
        done += step
        residual = float(np.max(np.abs(s @ q - s)))
        power = _normalize_rows(power @ power)
        step *= 2
    if np.array_equal(q, q[::-1, ::-1]):
        # mirrored chains have palindromic stationary vectors; remove rounding asymmetry
        s = (s + s[::-1]) / 2
        residual = float(np.max(np.abs(s @ q - s)))
    return StationaryDistribution(s, residual, done)


def stationary_regularity(s, n: int | None = None) -> float:
    """Expected ratio entropy under a distribution over states, in bits."""
    p = s.probabilities if isinstance(s, StationaryDistribution) else np.asarray(s, dtype=float)
    n = len(p) - 1 if n is None else n
    return math.fsum(float(pi) * ratio_entropy(i, n) for i, pi in enumerate(p))


def _start_vector(start, size: int) -> np.ndarray:
    if np.ndim(start) == 0:
        v = np.zeros(size)
        v[int(start)] = 1.0
        return v
    v = np.asarray(start, dtype=float)
    if v.shape != (size,) or np.any(v < 0) or abs(v.sum() - 1) > 1e-9:
        raise ValueError("start must be a state index or a distribution over all states")
    return v


def iterate_chain(m, start, generations: int) -> np.ndarray:
    """Distributions over states for generations 0..``generations`` (rows)."""
    q = _as_q(m)
    if generations < 0:
        raise ValueError("generations must be >= 0")
    out = np.empty((generations + 1, q.shape[0]))
    out[0] = _start_vector(start, q.shape[0])
    for t in range(generations):
        out[t + 1] = out[t] @ q
    return out


def sample_chain(m, start_state: int, generations: int, seed: int = 0) -> np.ndarray:
    """One Monte Carlo trajectory of ``generations`` transmissions (start included)."""
    q = _as_q(m)
    size = q.shape[0]
    if not 0 <= start_state < size:
        raise ValueError(f"start_state {start_state} outside 0..{size - 1}")
    cum = [list(np.cumsum(row)) for row in q]
    u = np.random.default_rng(seed).random(generations).tolist()
    states = [int(start_state)]
    s = states[0]
    last = size - 1
    for x in u:
        s = min(bisect.bisect_right(cum[s], x), last)
        states.append(s)
    return np.array(states)


# --- serialization -------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_matrix_csv(m: TransitionMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in m.q:
            w.writerow([_fmt(x) for x in row])


def read_matrix_csv(path: str | Path) -> TransitionMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[float(x) for x in r] for r in csv.reader(fh) if r]
    return TransitionMatrix(np.array(rows))


def matrix_to_dict(m: TransitionMatrix) -> dict:
    return {
        "format": "freqreg.transition-matrix",
        "states": m.size,
        "epsilon": m.epsilon,
        "mirror": m.mirror,
        "smoothing": m.smoothing,
        "counts": None if m.counts is None else m.counts.tolist(),
        "q": [[_fmt(x) for x in row] for row in m.q],
        "provenance": m.provenance,
    }


def matrix_from_dict(d: dict) -> TransitionMatrix:
    if not isinstance(d, dict) or "q" not in d:
        raise ValueError("not a transition-matrix document: missing 'q'")
    return TransitionMatrix(
        np.array([[float(x) for x in row] for row in d["q"]]),
        epsilon=d.get("epsilon"),
        counts=None if d.get("counts") is None else np.array(d["counts"]),
        mirror=bool(d.get("mirror", False)),
        smoothing=d.get("smoothing", "counts"),
        provenance=d.get("provenance") or {},
    )


def write_matrix_json(m: TransitionMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix_to_dict(m), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_matrix_json(path: str | Path) -> TransitionMatrix:
    return matrix_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_pairs_csv(path: str | Path) -> tuple[list[tuple[int, int]], list[str] | None]:
    """Read ``input,output[,participant_id]`` rows; returns pairs and optional group ids."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if not {"input", "output"} <= set(fields):
            if not fields:
                return [], None
            raise ValueError(f"{path}: header must contain input,output; got {','.join(fields)}")
        pairs, groups = [], []
        for lineno, row in enumerate(reader, start=2):
            try:
                pairs.append((int(row["input"]), int(row["output"])))
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: input/output must be integers") from None
            groups.append(row.get("participant_id") or "")
    has_groups = "participant_id" in fields
    return pairs, (groups if has_groups else None)


def write_pairs_csv(pairs: Sequence[tuple[int, int]], path: str | Path, groups: Sequence[str] | None = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["input", "output"] + (["participant_id"] if groups is not None else []))
        for k, (i, o) in enumerate(pairs):
            w.writerow([i, o] + ([groups[k]] if groups is not None else []))

"""Frequency-learning trial records, CSV ingestion, and per-pair regularization measures.

A :class:`RatioPair` stores counts of the *majority-coded* variant: the variant
that was more frequent in the observation phase. Sequences use 1 for an
occurrence of the minority variant. Balanced inputs (e.g. 5:5) have no natural
majority, so ingestion picks one at random with a seeded RNG and records the
choice in ``coding_flipped``; raw values are kept so that serialization is
lossless.
"""
from __future__ import annotations

import csv
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .infotheory import ratio_entropy, shannon_entropy

CSV_FIELDS = (
    "participant_id",
    "condition_domain",
    "condition_load",
    "context_id",
    "n",
    "input_majority",
    "output_majority",
    "input_sequence",
    "output_sequence",
    "estimate",
)

DOMAINS = {"words": "linguistic", "marbles": "nonlinguistic"}
DOMAIN_CODES = {v: k for k, v in DOMAINS.items()}
LOADS = {1: "low", 6: "high"}
TRAINING_RATIOS = (5, 6, 7, 8, 9, 10)


class SchemaError(ValueError):
    """Raised when a trial file fails validation; ``problems`` holds (line, message) pairs."""

    def __init__(self, path, problems: list[tuple[int, str]]):
        self.path = str(path)
        self.problems = problems
        lines = "\n".join(f"  {self.path}:{ln}: {msg}" for ln, msg in problems)
        super().__init__(f"{len(problems)} problem(s) in {self.path}:\n{lines}")


class MissingFieldError(ValueError):
    pass


class UndefinedBaselineError(ValueError):
    pass


class EmptyGroupError(ValueError):
    pass


def _check_sequence(seq: str | None, n: int, minority: int, name: str) -> None:
    if seq is None:
        return
    if len(seq) != n or set(seq) - {"0", "1"}:
        raise ValueError(f"{name} must be a string of {n} '0'/'1' characters, got {seq!r}")
    if seq.count("1") != minority:
        raise ValueError(
            f"{name} {seq!r} has {seq.count('1')} minority tokens but the count implies {minority}"
        )


def _on_grid(x: float) -> bool:
    return 0.0 <= x <= 1.0 and abs(x * 10 - round(x * 10)) < 1e-9


def _complement(seq: str | None) -> str | None:
    return None if seq is None else seq.translate(str.maketrans("01", "10"))


@dataclass(frozen=True)
class RatioPair:
    input_majority: int
    output_majority: int
    n: int = 10
    input_sequence: str | None = None
    output_sequence: str | None = None
    estimate: float | None = None
    context_id: str = "1"
    coding_flipped: bool = False

    def __post_init__(self):
        n = self.n
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        for name in ("input_majority", "output_majority"):
            v = getattr(self, name)
            if not 0 <= v <= n:
                raise ValueError(f"{name}={v} outside [0, {n}]")
        if 2 * self.input_majority < n:
            raise ValueError(
                f"input_majority={self.input_majority} is the minority of n={n}; code inputs by their majority"
            )
        if self.coding_flipped and 2 * self.input_majority != n:
            raise ValueError("only balanced inputs may carry a flipped coding")
        _check_sequence(self.input_sequence, n, n - self.input_majority, "input_sequence")
        _check_sequence(self.output_sequence, n, n - self.output_majority, "output_sequence")
        if self.estimate is not None and not _on_grid(self.estimate):
            raise ValueError(f"estimate {self.estimate} is not on the 11-point grid 0.0, 0.1, ..., 1.0")

    @property
    def balanced(self) -> bool:
        return 2 * self.input_majority == self.n

    @property
    def coded_output(self) -> int:
        """Output count of the variant treated as the majority (honours random coding)."""
        return self.n - self.output_majority if self.coding_flipped else self.output_majority

    @property
    def coded_input_sequence(self) -> str | None:
        return _complement(self.input_sequence) if self.coding_flipped else self.input_sequence

    @property
    def coded_estimate(self) -> float | None:
        if self.estimate is None or not self.coding_flipped:
            return self.estimate
        return round(1.0 - self.estimate, 1)


@dataclass(frozen=True)
class Condition:
    domain: str  # "linguistic" | "nonlinguistic"
    load: int

    def __post_init__(self):
        if self.domain not in DOMAIN_CODES:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.load < 1:
            raise ValueError(f"load must be >= 1, got {self.load}")

    @property
    def tag(self) -> str:
        return f"{DOMAIN_CODES[self.domain]}{self.load}"


@dataclass(frozen=True)
class ParticipantRecord:
    """One participant's pairs.

    A record may hold fewer pairs than its load (an incomplete high-load
    session) but never more; ``complete`` tells the two apart.
    """

    participant_id: str
    condition: Condition
    pairs: tuple[RatioPair, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.pairs:
            raise ValueError(f"participant {self.participant_id!r} has no pairs")
        if len(self.pairs) > self.condition.load:
            raise ValueError(
                f"participant {self.participant_id!r} has {len(self.pairs)} pairs but load {self.condition.load}"
            )

    @property
    def complete(self) -> bool:
        return len(self.pairs) == self.condition.load


@dataclass(frozen=True)
class ChangeRecord:
    delta_h: float
    delta_majority_freq: float
    percent_regularized: float | None


def entropy_change(p: RatioPair) -> float:
    """Output ratio entropy minus input ratio entropy; negative means regularized."""
    return ratio_entropy(p.output_majority, p.n) - ratio_entropy(p.input_majority, p.n)


def majority_frequency_change(p: RatioPair) -> float:
    return (p.coded_output - p.input_majority) / p.n


def percent_regularized(delta_h: float, baseline_h: float) -> float:
    if not baseline_h > 0:
        raise UndefinedBaselineError(f"baseline entropy must be > 0, got {baseline_h}")
    return -delta_h / baseline_h * 100.0


def change_record(p: RatioPair) -> ChangeRecord:
    dh = entropy_change(p)
    base = ratio_entropy(p.input_majority, p.n)
    return ChangeRecord(
        delta_h=dh,
        delta_majority_freq=majority_frequency_change(p),
        percent_regularized=percent_regularized(dh, base) if base > 0 else None,
    )


def estimate_entropy_change(p: RatioPair) -> float:
    if p.estimate is None:
        raise MissingFieldError("pair has no slider estimate")
    return shannon_entropy([p.estimate, 1.0 - p.estimate]) - ratio_entropy(p.input_majority, p.n)


def group_by_condition(records: Iterable[ParticipantRecord]) -> dict[str, list[RatioPair]]:
    groups: dict[str, list[RatioPair]] = OrderedDict()
    for r in records:
        groups.setdefault(r.condition.tag, []).extend(r.pairs)
    return groups


def mean_entropy_change(records: Sequence[ParticipantRecord]) -> dict[str, float]:
    """Mean entropy change over all pairs, per condition tag (e.g. ``"words6"``)."""
    if not records:
        raise EmptyGroupError("no records")
    out = {}
    for tag, pairs in group_by_condition(records).items():
        if not pairs:
            raise EmptyGroupError(f"condition {tag} has no pairs")
        out[tag] = math.fsum(entropy_change(p) for p in pairs) / len(pairs)
    return out


def transition_pairs(records: Iterable[ParticipantRecord]) -> list[tuple[int, int]]:
    """(input, output) state pairs in majority coding, for fitting transition matrices."""
    return [(p.input_majority, p.coded_output) for r in records for p in r.pairs]


# --- CSV ingestion -------------------------------------------------------


def _parse_int(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def ingest_csv(path: str | Path, seed: int = 0) -> list[ParticipantRecord]:
    """Read and validate a trial CSV.

    Every problem found is collected and raised together in one
    :class:`SchemaError`, each tagged with its line number. Balanced inputs get
    a random majority coding drawn from ``seed``, in file order.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        warnings.warn(f"{path} is empty; no records read", stacklevel=2)
        return []
    rng = np.random.default_rng(seed)
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    if tuple(header) != CSV_FIELDS:
        raise SchemaError(path, [(1, f"header must be {','.join(CSV_FIELDS)}; got {','.join(header)}")])

    problems: list[tuple[int, str]] = []
    rows: "OrderedDict[str, list]" = OrderedDict()
    conditions: dict[str, tuple[Condition, int]] = {}
    seen: dict[tuple[str, str], int] = {}
    for lineno, row in enumerate(reader, start=2):
        try:
            if None in row or any(v is None for v in row.values()):
                raise ValueError(f"expected {len(CSV_FIELDS)} fields")
            pid = row["participant_id"].strip()
            if not pid:
                raise ValueError("participant_id is empty")
            domain = row["condition_domain"].strip()
            if domain not in DOMAINS:
                raise ValueError(f"condition_domain must be one of {sorted(DOMAINS)}, got {domain!r}")
            load = _parse_int(row["condition_load"], "condition_load")
            if load not in LOADS:
                raise ValueError(f"condition_load must be 1 or 6, got {load}")
            cond = Condition(DOMAINS[domain], load)
            ctx = row["context_id"].strip()
            if not ctx:
                raise ValueError("context_id is empty")
            key = (pid, ctx)
            if key in seen:
                raise ValueError(f"duplicate (participant, context) {key}; first seen on line {seen[key]}")
            if pid in conditions and conditions[pid][0] != cond:
                raise ValueError(
                    f"participant {pid!r} changes condition (first set on line {conditions[pid][1]})"
                )
            n = _parse_int(row["n"], "n")
            est_raw = row["estimate"].strip()
            estimate = None
            if est_raw:
                try:
                    estimate = float(est_raw)
                except ValueError:
                    raise ValueError(f"estimate must be a decimal, got {est_raw!r}") from None
            inp = _parse_int(row["input_majority"], "input_majority")
            pair = RatioPair(
                input_majority=inp,
                output_majority=_parse_int(row["output_majority"], "output_majority"),
                n=n,
                input_sequence=row["input_sequence"].strip() or None,
                output_sequence=row["output_sequence"].strip() or None,
                estimate=estimate,
                context_id=ctx,
                coding_flipped=bool(n > 0 and 2 * inp == n and rng.random() < 0.5),
            )
        except ValueError as e:
            problems.append((lineno, str(e)))
            continue
        seen[key] = lineno
        conditions.setdefault(pid, (cond, lineno))
        rows.setdefault(pid, []).append((lineno, pair))

    records = []
    for pid, items in rows.items():
        cond = conditions[pid][0]
        if len(items) > cond.load:
            problems.append((items[cond.load][0], f"participant {pid!r} exceeds load {cond.load}"))
            continue
        records.append(ParticipantRecord(pid, cond, tuple(p for _, p in items)))
    if problems:
        raise SchemaError(path, problems)
    return records


def _fmt_estimate(e: float | None) -> str:
    return "" if e is None else f"{e:.1f}"


def record_rows(records: Iterable[ParticipantRecord]) -> list[dict[str, str]]:
    out = []
    for r in records:
        for p in r.pairs:
            out.append(
                {
                    "participant_id": r.participant_id,
                    "condition_domain": DOMAIN_CODES[r.condition.domain],
                    "condition_load": str(r.condition.load),
                    "context_id": p.context_id,
                    "n": str(p.n),
                    "input_majority": str(p.input_majority),
                    "output_majority": str(p.output_majority),
                    "input_sequence": p.input_sequence or "",
                    "output_sequence": p.output_sequence or "",
                    "estimate": _fmt_estimate(p.estimate),
                }
            )
    return out


def write_csv(records: Iterable[ParticipantRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(record_rows(records))

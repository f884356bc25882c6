"""Command-line interface: ``freqreg <subcommand> ...``.

Every report is deterministic JSON: it embeds the tool version, the resolved
configuration, the seed and a SHA-256 digest of each input file, and contains
no timestamps. Exit status is 0 on success, 1 on invalid input or usage, 2 on
internal errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, _streams
from .classify import DEFAULT_RUNS, classify_participant, matching_envelope
from .infotheory import CooccurrenceTable, InvalidTableError, entropy_profile, ratio_entropy
from .learners import LearnerModel, load_mix, simulate_population
from .markov import (
    TransitionMatrix,
    fit_transition_matrix,
    iterate_chain,
    matrix_from_dict,
    matrix_to_dict,
    read_matrix_csv,
    read_pairs_csv,
    sample_chain,
    stationary_distribution,
    stationary_regularity,
)
from .primacy import UndefinedScoreError, primacy_score, regularization_type
from .stats import DEFAULT_RESAMPLES, bootstrap_mean, bootstrap_stationary
from .trials import (
    TRAINING_RATIOS,
    SchemaError,
    change_record,
    estimate_entropy_change,
    group_by_condition,
    ingest_csv,
    majority_frequency_change,
    record_rows,
    transition_pairs,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, Path):
        return str(x)
    return x


INPUT_KEYS = ("table", "data", "pairs", "matrix", "config")


def _report(args, result: dict) -> str:
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    inputs = {}
    for key in INPUT_KEYS:
        path = config.get(key)
        if path:
            inputs[key] = {"path": str(path), "sha256": _digest(path)}
    doc = {
        "tool": "freqreg",
        "version": __version__,
        "command": args.command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": inputs,
        "result": result,
    }
    return json.dumps(_plain(doc), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


# --- shared loaders ------------------------------------------------------


def _records(args):
    return ingest_csv(args.data, seed=args.seed)


def _pairs_and_groups(args):
    if getattr(args, "data", None):
        recs = _records(args)
        pairs = transition_pairs(recs)
        groups = [r.participant_id for r in recs for _ in r.pairs]
        return pairs, groups
    if getattr(args, "pairs", None):
        return read_pairs_csv(args.pairs)
    raise UsageError("one of --data or --pairs is required")


def _matrix(args) -> TransitionMatrix:
    if getattr(args, "matrix", None):
        path = str(args.matrix)
        if path.endswith(".json"):
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            # accept a fit-matrix report as well as a bare matrix document
            if isinstance(doc, dict) and isinstance(doc.get("result"), dict) and "matrix" in doc["result"]:
                doc = doc["result"]["matrix"]
            m = matrix_from_dict(doc)
        else:
            m = read_matrix_csv(path)
        if not m.strictly_positive:
            raise ValueError(f"{path}: matrix has zero entries; the chain may not be ergodic")
        return m
    pairs, _ = _pairs_and_groups(args)
    return fit_transition_matrix(pairs, mirror=args.mirror, epsilon=args.epsilon, n=args.n, smoothing=args.smoothing)


# --- subcommands ---------------------------------------------------------


def cmd_entropy(args) -> str:
    table = CooccurrenceTable.from_csv(args.table)
    prof = entropy_profile(table)
    result = {"profile": prof.as_dict(), "contexts": list(table.row_labels), "variants": list(table.column_labels)}
    if args.format == "csv":
        return _csv_text(["quantity", "bits"], [[k, _fmt(v)] for k, v in prof.as_dict().items()])
    return _report(args, result)


def cmd_change(args) -> str:
    records = _records(args)
    rows = []
    for r in records:
        for p in r.pairs:
            c = change_record(p)
            rows.append(
                {
                    "participant_id": r.participant_id,
                    "condition": r.condition.tag,
                    "context_id": p.context_id,
                    "input_majority": p.input_majority,
                    "output_majority": p.coded_output,
                    "delta_h": c.delta_h,
                    "delta_majority_freq": c.delta_majority_freq,
                    "percent_regularized": c.percent_regularized,
                    "estimate_delta_h": None if p.estimate is None else estimate_entropy_change(p),
                }
            )
    if args.format == "csv":
        header = list(rows[0]) if rows else ["participant_id"]
        return _csv_text(
            header,
            [[_fmt(v) if isinstance(v, float) or v is None else v for v in row.values()] for row in rows],
        )
    conditions = {}
    for i, (tag, pairs) in enumerate(sorted(group_by_condition(records).items())):
        dh = [row["delta_h"] for row in rows if row["condition"] == tag]
        df = [majority_frequency_change(p) for p in pairs]
        ci_h = bootstrap_mean(dh, args.resamples, args.confidence, seed=args.seed + 2 * i, workers=args.workers)
        ci_f = bootstrap_mean(df, args.resamples, args.confidence, seed=args.seed + 2 * i + 1, workers=args.workers)
        conditions[tag] = {
            "pairs": len(pairs),
            "mean_delta_h": ci_h.point_estimate,
            "delta_h_ci": [ci_h.lower, ci_h.upper],
            "mean_delta_majority_freq": ci_f.point_estimate,
            "delta_majority_freq_ci": [ci_f.lower, ci_f.upper],
        }
    return _report(args, {"conditions": conditions, "pairs": rows})


def cmd_primacy(args) -> str:
    rows = []
    for r in _records(args):
        for p in r.pairs:
            seq = p.coded_input_sequence
            score = None
            if seq is not None:
                try:
                    score = primacy_score(seq).value
                except UndefinedScoreError:
                    score = None
            rows.append(
                {
                    "participant_id": r.participant_id,
                    "condition": r.condition.tag,
                    "context_id": p.context_id,
                    "input_majority": p.input_majority,
                    "output_majority": p.coded_output,
                    "input_sequence": seq,
                    "primacy": score,
                    "regularization_type": regularization_type(p),
                }
            )
    if args.format == "csv":
        header = list(rows[0]) if rows else ["participant_id"]
        return _csv_text(header, [[_fmt(v) if isinstance(v, float) or v is None else v for v in row.values()] for row in rows])
    return _report(args, {"pairs": rows})


def cmd_classify(args) -> str:
    records = _records(args)
    inputs = tuple(args.inputs)
    env = matching_envelope(inputs, args.runs, args.confidence, seed=args.seed, n=args.n, workers=args.workers)
    labels, tallies = [], {}
    for r in records:
        if len(r.pairs) not in (1, 6):
            raise ValueError(f"participant {r.participant_id!r} has {len(r.pairs)} pairs; need 1 or 6 to classify")
        lab = classify_participant(r, env, args.confidence)
        ev = lab.evidence
        labels.append(
            {
                "participant_id": r.participant_id,
                "condition": r.condition.tag,
                "label": lab.label,
                "statistic": lab.statistic,
                "evidence": [ev.lower, ev.upper],
            }
        )
        t = tallies.setdefault(r.condition.tag, {"regularizer": 0, "matcher": 0, "variabilizer": 0})
        t[lab.label] += 1
    if args.format == "csv":
        return _csv_text(
            ["participant_id", "condition", "label", "statistic", "lower", "upper"],
            [[x["participant_id"], x["condition"], x["label"], _fmt(x["statistic"]), _fmt(x["evidence"][0]), _fmt(x["evidence"][1])] for x in labels],
        )
    envelope = {"lower": env.lower, "upper": env.upper, "confidence": env.confidence, "runs": env.runs, "input_set": list(env.input_set)}
    return _report(args, {"envelope": envelope, "counts": tallies, "participants": labels})


def cmd_fit_matrix(args) -> str:
    m = _matrix(args)
    if args.format == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows([[_fmt(x) for x in row] for row in m.q])
        return buf.getvalue()
    return _report(args, {"matrix": matrix_to_dict(m)})


def cmd_stationary(args) -> str:
    m = _matrix(args)
    s = stationary_distribution(m, tolerance=args.tolerance, max_iterations=args.max_iterations)
    if args.format == "csv":
        return _csv_text(["state", "probability"], [[i, _fmt(p)] for i, p in enumerate(s.probabilities)])
    return _report(
        args,
        {
            "stationary": s.probabilities,
            "residual": s.residual,
            "generations": s.iterations,
            "regularity_bits": stationary_regularity(s),
            "state_entropy_bits": [ratio_entropy(i, m.n) for i in range(m.size)],
        },
    )


def cmd_iterate(args) -> str:
    m = _matrix(args)
    dists = iterate_chain(m, args.start, args.generations)
    if args.format == "csv":
        return _csv_text(
            ["generation", "state", "probability"],
            [[t, i, _fmt(p)] for t, row in enumerate(dists) for i, p in enumerate(row)],
        )
    return _report(
        args,
        {"distributions": dists, "regularity_bits": [stationary_regularity(d) for d in dists]},
    )


def cmd_sample_chain(args) -> str:
    m = _matrix(args)
    states = sample_chain(m, args.start, args.generations, seed=args.seed)
    if args.format == "csv":
        return _csv_text(["generation", "state"], [[t, int(s)] for t, s in enumerate(states)])
    freq = np.bincount(states, minlength=m.size) / len(states)
    return _report(args, {"states": states, "empirical_frequencies": freq})


def cmd_simulate(args) -> str:
    if args.config:
        mix = load_mix(args.config, n=args.n)
    else:
        mix = [(LearnerModel(g, n=args.n), 1.0) for g in (args.gamma or [1.0])]
    inputs = tuple(args.inputs)
    load = 1 if args.load == 1 else None
    records = simulate_population(
        mix, inputs, args.participants, seed=args.seed, domain=args.domain, load=load, workers=args.workers
    )
    rows = record_rows(records)
    fields = list(rows[0])
    text = _csv_text(fields, [[row[f] for f in fields] for row in rows])
    if args.format == "csv":
        return text
    mix_desc = [{"gamma": m.gamma, "weight": w} for m, w in mix]
    return _report(
        args,
        {"mix": mix_desc, "participants": len(records), "rows": len(rows), "csv_sha256": hashlib.sha256(text.encode()).hexdigest(), "csv": text},
    )


def cmd_bootstrap(args) -> str:
    pairs, groups = _pairs_and_groups(args)
    res = bootstrap_stationary(
        pairs,
        args.resamples,
        args.confidence,
        args.seed,
        mirror=args.mirror,
        epsilon=args.epsilon,
        n=args.n,
        smoothing=args.smoothing,
        groups=groups,
        unit=args.unit,
        workers=args.workers,
    )
    if args.format == "csv":
        return _csv_text(list(res.as_dict()), [[_fmt(v) if isinstance(v, float) else v for v in res.as_dict().values()]])
    return _report(args, {"stationary_regularity": res.as_dict()})


# --- parser --------------------------------------------------------------


def _common(p, seed=False, workers=False):
    p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--n", type=int, default=10, help="trials per phase")
    if seed:
        p.add_argument("--seed", type=int, default=_streams.default_seed(), help="master RNG seed (env FREQREG_SEED)")
    if workers:
        p.add_argument("--workers", type=int, default=_streams.default_workers(), help="worker cap (env FREQREG_WORKERS)")


def _fit_options(p, matrix=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="trial CSV")
    src.add_argument("--pairs", help="CSV with input,output[,participant_id] columns")
    if matrix:
        src.add_argument("--matrix", help="transition matrix (.json or .csv)")
    p.add_argument("--mirror", action=argparse.BooleanOptionalAction, default=True, help="add the mirror image (n-i, n-o) of every pair")
    p.add_argument("--epsilon", type=float, default=None, help="smoothing constant (default 1/(n+1)^2)")
    p.add_argument("--smoothing", choices=("counts", "probabilities"), default="counts", help="where epsilon is added")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="freqreg", description="Regularization measures and iterated-learning dynamics.", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"freqreg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", help="entropy profile of a co-occurrence table", formatter_class=fmt)
    p.add_argument("--table", required=True, help="CSV: header 'context,<variants>', one row per context")
    _common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("change", help="per-pair entropy and frequency change, condition means with bootstrap CIs", formatter_class=fmt)
    p.add_argument("--data", required=True, help="trial CSV")
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES, help="bootstrap resamples for condition means")
    p.add_argument("--confidence", type=float, default=0.95, help="confidence level")
    _common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_change)

    p = sub.add_parser("primacy", help="primacy score and regularization type per pair", formatter_class=fmt)
    p.add_argument("--data", required=True, help="trial CSV")
    _common(p, seed=True)
    p.set_defaults(func=cmd_primacy)

    p = sub.add_parser("classify", help="label participants regularizer / matcher / variabilizer", formatter_class=fmt)
    p.add_argument("--data", required=True, help="trial CSV")
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS, help="Monte Carlo runs for the matching envelope")
    p.add_argument("--confidence", type=float, default=0.95, help="confidence level")
    p.add_argument("--inputs", type=_int_list, default=",".join(map(str, TRAINING_RATIOS)), help="envelope input ratios, majority counts")
    _common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fit-matrix", help="estimate a smoothed transition matrix", formatter_class=fmt)
    _fit_options(p, matrix=False)
    _common(p, seed=True)
    p.set_defaults(func=cmd_fit_matrix)

    p = sub.add_parser("stationary", help="stationary distribution and stationary regularity", formatter_class=fmt)
    _fit_options(p)
    p.add_argument("--tolerance", type=float, default=1e-12, help="power-iteration tolerance on max |sQ - s|")
    p.add_argument("--max-iterations", type=int, default=10**6, help="cap on generations advanced by the solver")
    _common(p, seed=True)
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("iterate", help="evolve a distribution over states for G generations", formatter_class=fmt)
    _fit_options(p)
    p.add_argument("--start", type=int, default=5, help="start state")
    p.add_argument("--generations", type=int, default=50, help="generations to iterate")
    _common(p, seed=True)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("sample-chain", help="sample one transmission chain", formatter_class=fmt)
    _fit_options(p)
    p.add_argument("--start", type=int, default=5, help="start state")
    p.add_argument("--generations", type=int, default=1000, help="transmissions to sample")
    _common(p, seed=True)
    p.set_defaults(func=cmd_sample_chain)

    p = sub.add_parser("simulate", help="synthetic participant population as a trial CSV", formatter_class=fmt)
    mix = p.add_mutually_exclusive_group()
    mix.add_argument("--config", help="JSON learner mix: [{gamma, weight}, ...]")
    mix.add_argument("--gamma", type=float, action="append", help="learner exponent, repeatable for an equal-weight mix; 1.0 when neither this nor --config is given")
    p.add_argument("--participants", type=int, default=100, help="synthetic participants")
    p.add_argument("--inputs", type=_int_list, default=",".join(map(str, TRAINING_RATIOS)), help="input ratios, majority counts")
    p.add_argument("--load", type=int, choices=(1, 6), default=6, help="1: one ratio per participant; 6: all ratios")
    p.add_argument("--domain", choices=("linguistic", "nonlinguistic"), default="nonlinguistic", help="condition domain tag")
    _common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bootstrap", help="bootstrap interval of stationary regularity", formatter_class=fmt)
    _fit_options(p, matrix=False)
    p.add_argument("--resamples", type=int, default=DEFAULT_RESAMPLES, help="bootstrap resamples")
    p.add_argument("--confidence", type=float, default=0.95, help="confidence level")
    p.add_argument("--unit", choices=("pair", "participant"), default="pair", help="resampling unit")
    _common(p, seed=True, workers=True)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _emit(args, args.func(args))
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except (UsageError, SchemaError, InvalidTableError, ValueError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

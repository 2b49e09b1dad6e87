"""Command-line entry point for batch evaluation runs.

Subcommands: validate, bitrate, abx, cer, report, synth.  Exit status is
0 on success, 1 when validation or data errors occur, 2 on usage errors.
Diagnostics go to stderr, one per line, prefixed with their severity.  All
numeric output is deterministic given inputs, --seed, and flags; --threads
only changes the execution schedule, never the bytes emitted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import humaneval, synth
from .abx import evaluate_abx
from .bitrate import bitrate as compute_bitrate
from .bitrate import build_symbol_inventory
from .distance import DISTANCE_FLAGS, distance_from_flag
from .errors import ZrsEvalError
from .formats import (
    FormatError,
    atomic_write_text,
    load_submission_dir,
    parse_embedding_file,
    parse_item_manifest,
    parse_judgment_table,
    parse_transcription_table,
    serialize_judgment_table,
    validate_submission,
)

THREADS_ENV = "ZRS_EVAL_THREADS"


def _threads_arg(value: str) -> int:
    if value == "auto":
        return os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--threads must be a positive integer or 'auto', got {value!r}"
        ) from None
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def _resolve_threads(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        return _threads_arg(env)
    return 1


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _diag(severity: str, message: str) -> None:
    print(f"{severity}: {message}", file=sys.stderr)


def _load_manifest_submission(args):
    manifest = parse_item_manifest(_read_text(args.manifest))
    available = load_submission_dir(args.submission)
    return manifest, available


def _parse_manifest_embeddings(manifest, available):
    embeddings = {}
    for entry in manifest.entries:
        content = available.get(entry.item_id)
        if content is None:
            raise ZrsEvalError(f"missing item {entry.item_id!r} in submission")
        embeddings[entry.item_id] = parse_embedding_file(content, entry.item_id)
    return embeddings


def _read_system_value_tsv(path: str) -> dict[str, float]:
    """Two-column TSV with a header row: system_id<TAB>value."""
    out: dict[str, float] = {}
    lines = _read_text(path).split("\n")
    for lineno, raw in enumerate(lines[1:], 2):
        ln = raw.rstrip("\r")
        if not ln:
            continue
        parts = ln.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected system_id<TAB>value")
        try:
            out[parts[0]] = float(parts[1])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: {parts[1]!r} is not a number") from None
    return out


def _read_metadata_tsv(path: str) -> dict[str, dict[str, str]]:
    """TSV with header: first column system_id, rest opaque metadata columns."""
    lines = [ln.rstrip("\r") for ln in _read_text(path).split("\n") if ln.strip()]
    if not lines:
        return {}
    header = lines[0].split("\t")
    out: dict[str, dict[str, str]] = {}
    for lineno, ln in enumerate(lines[1:], 2):
        parts = ln.split("\t")
        if len(parts) != len(header):
            raise FormatError(f"{path}:{lineno}: {len(parts)} fields, expected "
                              f"{len(header)}")
        out[parts[0]] = dict(zip(header[1:], parts[1:]))
    return out


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    manifest, available = _load_manifest_submission(args)
    report = validate_submission(manifest, available)
    for issue in report.issues:
        _diag(issue.severity, f"[{issue.item_id}] {issue.message}")
    n_err = len(report.errors())
    n_warn = len(report.warnings())
    print(f"{'ok' if report.ok else 'invalid'}\t{n_err}\t{n_warn}")
    return 0 if report.ok else 1


def _cmd_bitrate(args) -> int:
    manifest, available = _load_manifest_submission(args)
    embeddings = _parse_manifest_embeddings(manifest, available)
    inventory = build_symbol_inventory([embeddings[i] for i in manifest.ids()])
    result = compute_bitrate(inventory, manifest.total_duration_s())
    values = (
        str(result.n),
        str(result.distinct),
        f"{result.entropy_bits_per_symbol:.6f}",
        f"{result.duration_s:.6f}",
        f"{result.bitrate_bits_per_s:.6f}",
    )
    if args.format == "json":
        print(json.dumps({
            "n": result.n,
            "distinct": result.distinct,
            "entropy_bits": float(f"{result.entropy_bits_per_symbol:.6f}"),
            "duration_s": float(f"{result.duration_s:.6f}"),
            "bitrate_bits_per_s": float(f"{result.bitrate_bits_per_s:.6f}"),
        }, indent=2))
    elif args.format == "table":
        header = ("n", "distinct", "entropy_bits", "duration_s", "bitrate_bits_per_s")
        widths = [max(len(h), len(v)) for h, v in zip(header, values)]
        print("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip())
        print("  ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip())
    else:
        print("\t".join(values))
    return 0


def _cmd_abx(args) -> int:
    manifest, available = _load_manifest_submission(args)
    embeddings = _parse_manifest_embeddings(manifest, available)
    result = evaluate_abx(
        manifest,
        embeddings,
        distance_from_flag(args.distance),
        threads=_resolve_threads(args),
        max_triples_per_cell=args.max_triples_per_cell,
        seed=args.seed,
    )
    if args.per_pair:
        lines = ["center1\tcenter2\tcontexts\tcells\terror"]
        for row in result.pair_table:
            lines.append(
                f"{row.center1}\t{row.center2}\t{row.contexts}\t{row.cells}"
                f"\t{row.error:.6f}"
            )
        atomic_write_text(args.per_pair, "\n".join(lines) + "\n")
    if args.format == "json":
        print(json.dumps({
            "global_error_rate": float(f"{result.global_error_rate:.6f}"),
            "cells_scored": result.cells_scored,
            "triples_scored": result.triples_scored,
        }, indent=2))
    else:
        print(f"{result.global_error_rate:.6f}")
    return 0


def _filtered_scores(args):
    judgments = parse_judgment_table(_read_text(args.judgments))
    transcripts = parse_transcription_table(_read_text(args.transcripts))
    retained, filter_report = humaneval.filter_participants(
        judgments, transcripts, threshold=args.threshold
    )
    for warning in filter_report.warnings:
        _diag("warning", warning)
    _diag(
        "info",
        f"retained {filter_report.summary()} participants "
        f"(catch-trial CER threshold {filter_report.threshold})",
    )
    scores = humaneval.aggregate_systems(
        retained, transcripts, n_resamples=args.resamples, seed=args.seed
    )
    return scores


def _cmd_cer(args) -> int:
    scores = _filtered_scores(args)
    rows = [
        (
            s.system_id,
            str(s.n_trials[0]),
            "-" if s.cer_mean is None else f"{s.cer_mean:.6f}",
            "-" if s.ci_half_widths[0] is None else f"{s.ci_half_widths[0]:.6f}",
        )
        for s in scores
    ]
    header = ("system_id", "n", "cer_mean", "cer_ci")
    if args.format == "json":
        print(json.dumps({
            "systems": [dict(zip(header, row)) for row in rows]
        }, indent=2))
    elif args.format == "table":
        cells = [header, *rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        for r in cells:
            print("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    else:
        print("\t".join(header))
        for row in rows:
            print("\t".join(row))
    return 0


def _cmd_report(args) -> int:
    scores = _filtered_scores(args)
    abx_results = _read_system_value_tsv(args.abx) if args.abx else {}
    bitrate_results = _read_system_value_tsv(args.bitrate) if args.bitrate else {}
    metadata = _read_metadata_tsv(args.metadata) if args.metadata else {}
    board = humaneval.build_leaderboard(scores, abx_results, bitrate_results, metadata)
    if args.format == "json":
        sys.stdout.write(humaneval.leaderboard_to_json(board))
    elif args.format == "table":
        sys.stdout.write(humaneval.leaderboard_to_table(board))
    else:
        sys.stdout.write(humaneval.leaderboard_to_tsv(board))
    if args.correlations:
        report = humaneval.correlation_report(
            scores, abx_results, bitrate_results, gold_system_id=args.gold_system
        )
        atomic_write_text(
            args.correlations, humaneval.correlation_report_to_tsv(report)
        )
    return 0


def _cmd_synth(args) -> int:
    config = synth.SynthConfig(
        n_phones=args.n_phones,
        n_speakers=args.n_speakers,
        n_items_per_cell=args.items_per_cell,
        frame_shift_s=args.frame_shift,
        phone_duration_frames=(args.min_frames, args.max_frames),
        class_separation=args.class_separation,
        speaker_shift=args.speaker_shift,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    corpus = synth.generate_corpus(config)
    synth.write_corpus(corpus, args.out)
    gold = synth.gold_onehot_encoding(corpus)
    collapsed = {i: synth.collapse_runs(seq) for i, seq in gold.items()}
    systems = {
        "gold": gold,
        "collapsed": collapsed,
        "sub": corpus.embeddings,
    }
    for name, embeddings in systems.items():
        synth.write_submission(embeddings, os.path.join(args.out, "systems", name))
    judgments = synth.generate_judgments(
        corpus.transcripts,
        systems={"gold": 0.95, "collapsed": 0.85, "sub": 0.6},
        seed=args.seed,
    )
    atomic_write_text(
        os.path.join(args.out, "judgments.csv"), serialize_judgment_table(judgments)
    )
    print(f"manifest\t{len(corpus.manifest)} items")
    print(f"transcripts\t{len(corpus.transcripts)} sentences")
    print(f"judgments\t{len(judgments)} records")
    for name in systems:
        print(f"system\t{name}\t{len(systems[name])} files")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zrs-eval",
        description="Batch evaluation for unsupervised speech-unit embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("tsv", "json", "table"), default="tsv",
                       help="output format (default tsv)")

    def add_threads_seed(p):
        p.add_argument("--threads", type=_threads_arg, default=None,
                       help=f"worker threads, or 'auto' (default: ${THREADS_ENV} or 1)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for all randomness (default 0)")

    p = sub.add_parser("validate", help="check a submission against its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--submission", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("bitrate", help="symbol entropy and bitrate of a submission")
    p.add_argument("--manifest", required=True)
    p.add_argument("--submission", required=True)
    add_format(p)
    p.set_defaults(func=_cmd_bitrate)

    p = sub.add_parser("abx", help="discrimination error of a submission")
    p.add_argument("--manifest", required=True)
    p.add_argument("--submission", required=True)
    p.add_argument("--distance", choices=sorted(DISTANCE_FLAGS), default="dtw-cosine",
                   help="sequence distance (default dtw-cosine)")
    p.add_argument("--per-pair", default=None, metavar="PATH",
                   help="also write a per-center-pair TSV")
    p.add_argument("--max-triples-per-cell", type=int, default=None, metavar="N",
                   help="seeded uniform subsample cap per cell")
    add_threads_seed(p)
    add_format(p)
    p.set_defaults(func=_cmd_abx)

    p = sub.add_parser("cer", help="catch-filtered per-system character error rates")
    p.add_argument("--judgments", required=True)
    p.add_argument("--transcripts", required=True)
    p.add_argument("--threshold", type=float, default=0.80,
                   help="catch-trial CER retention threshold (default 0.80)")
    p.add_argument("--resamples", type=int, default=10000,
                   help="bootstrap resamples (default 10000)")
    add_threads_seed(p)
    add_format(p)
    p.set_defaults(func=_cmd_cer)

    p = sub.add_parser("report", help="leaderboard over all measures")
    p.add_argument("--judgments", required=True)
    p.add_argument("--transcripts", required=True)
    p.add_argument("--abx", default=None, metavar="PATH",
                   help="per-system ABX error TSV (system_id<TAB>value, with header)")
    p.add_argument("--bitrate", default=None, metavar="PATH",
                   help="per-system bitrate TSV (system_id<TAB>value, with header)")
    p.add_argument("--metadata", default=None, metavar="PATH",
                   help="opaque per-system metadata TSV (first column system_id)")
    p.add_argument("--gold-system", default=None, metavar="ID",
                   help="system to also exclude in a second correlation variant")
    p.add_argument("--correlations", default=None, metavar="PATH",
                   help="write the cross-metric Pearson correlation TSV here")
    p.add_argument("--threshold", type=float, default=0.80)
    p.add_argument("--resamples", type=int, default=10000)
    add_threads_seed(p)
    add_format(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic corpus with gold truth")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-phones", type=int, default=5)
    p.add_argument("--n-speakers", type=int, default=3)
    p.add_argument("--items-per-cell", type=int, default=3)
    p.add_argument("--frame-shift", type=float, default=0.005)
    p.add_argument("--min-frames", type=int, default=5)
    p.add_argument("--max-frames", type=int, default=15,
                   help="exclusive upper bound on phone duration in frames")
    p.add_argument("--class-separation", type=float, default=1.0)
    p.add_argument("--speaker-shift", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    add_threads_seed(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ZrsEvalError as exc:
        _diag("error", str(exc))
        return 1
    except OSError as exc:
        _diag("error", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())

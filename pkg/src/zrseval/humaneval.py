"""Human-judgment statistics: CER, catch-trial filtering, per-system means,
bootstrap confidence intervals, Pearson correlations, and the leaderboard.

Text normalization for CER (applied identically to hypothesis and
reference): lowercase, Unicode punctuation stripped, whitespace runs
collapsed to a single space, edges trimmed.  CER may exceed 1 and is not
clipped.  Similarity means use target-reference trials only; source-
reference trials are reported as an auxiliary column.  Catch trials are
attention controls and are excluded from per-system means.
"""

from __future__ import annotations

import hashlib
import json
import math
import unicodedata
from dataclasses import dataclass

import numpy as np

from .distance import levenshtein
from .errors import (
    ConstantInput,
    EmptyReference,
    EmptyValues,
    LengthMismatch,
    TooFewPoints,
    UnknownSentence,
)
from .formats import JudgmentSet, TranscriptionTable

CORRELATION_PAIRS = (
    ("mos", "cer"),
    ("similarity", "cer"),
    ("similarity", "log_bitrate"),
    ("abx", "cer"),
)


def normalize_text(text: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace, trim edges."""
    lowered = text.lower()
    stripped = "".join(
        c for c in lowered if not unicodedata.category(c).startswith("P")
    )
    return " ".join(stripped.split())


def character_error_rate(hypothesis: str, reference: str) -> float:
    """Character-level edit distance over normalized texts / reference length."""
    ref = normalize_text(reference)
    if not ref:
        raise EmptyReference("reference is empty after normalization")
    hyp = normalize_text(hypothesis)
    return levenshtein(hyp, ref) / len(ref)


# ---------------------------------------------------------------------------
# catch-trial filtering


@dataclass(frozen=True)
class ParticipantCatchStats:
    n_catch: int
    mean_cer: float | None
    retained: bool


@dataclass(frozen=True)
class FilterReport:
    total: int
    retained_count: int
    threshold: float
    per_participant: dict[str, ParticipantCatchStats]
    warnings: tuple[str, ...]

    def summary(self) -> str:
        return f"{self.retained_count}/{self.total}"


def filter_participants(
    judgments: JudgmentSet,
    transcripts: TranscriptionTable,
    threshold: float = 0.80,
) -> tuple[JudgmentSet, FilterReport]:
    """Drop all records of participants whose mean catch-trial CER is >= threshold.

    Catch trials are the is_catch intelligibility records, scored against the
    gold transcription of their sentence.  Participants with no catch trials
    are retained with a warning.
    """
    catch_cers: dict[str, list[float]] = {}
    participants: list[str] = []
    seen: set[str] = set()
    for r in judgments.records:
        if r.participant_id not in seen:
            seen.add(r.participant_id)
            participants.append(r.participant_id)
        if r.is_catch and r.task == "intelligibility":
            gold = transcripts.rows.get(r.sentence_id)
            if gold is None:
                raise UnknownSentence(
                    f"catch trial references unknown sentence {r.sentence_id!r}"
                )
            catch_cers.setdefault(r.participant_id, []).append(
                character_error_rate(str(r.response), gold)
            )

    stats: dict[str, ParticipantCatchStats] = {}
    warnings: list[str] = []
    retained_ids: set[str] = set()
    for pid in participants:
        cers = catch_cers.get(pid)
        if not cers:
            stats[pid] = ParticipantCatchStats(0, None, True)
            retained_ids.add(pid)
            warnings.append(f"participant {pid!r} has no catch trials; retained")
            continue
        mean = math.fsum(cers) / len(cers)
        keep = mean < threshold
        stats[pid] = ParticipantCatchStats(len(cers), mean, keep)
        if keep:
            retained_ids.add(pid)

    retained = JudgmentSet(
        records=tuple(r for r in judgments.records if r.participant_id in retained_ids)
    )
    report = FilterReport(
        total=len(participants),
        retained_count=len(retained_ids),
        threshold=threshold,
        per_participant=stats,
        warnings=tuple(warnings),
    )
    return retained, report


# ---------------------------------------------------------------------------
# bootstrap and correlation statistics


def bootstrap_ci(
    values,
    n_resamples: int = 10000,
    level: float = 0.95,
    *,
    seed: int,
) -> tuple[float, float]:
    """Seeded percentile bootstrap CI for the mean.

    Resamples with replacement ``n_resamples`` times and returns the
    (1-level)/2 and 1-(1-level)/2 empirical quantiles of the resampled
    means.  Identical seeds give identical intervals.
    """
    data = np.asarray(list(values), dtype=np.float64)
    if data.size == 0:
        raise EmptyValues("bootstrap needs at least one value")
    rng = np.random.default_rng(seed)
    n = data.size
    means = np.empty(n_resamples, dtype=np.float64)
    chunk = max(1, min(n_resamples, 2_000_000 // n))
    done = 0
    while done < n_resamples:
        size = min(chunk, n_resamples - done)
        idx = rng.integers(0, n, size=(size, n))
        means[done:done + size] = data[idx].mean(axis=1)
        done += size
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(means, [alpha, 1.0 - alpha])
    return float(low), float(high)


def pearson_r(xs, ys) -> float:
    """Sample Pearson correlation coefficient, clamped to [-1, 1]."""
    x = np.asarray(list(xs), dtype=np.float64)
    y = np.asarray(list(ys), dtype=np.float64)
    if x.size != y.size:
        raise LengthMismatch(f"{x.size} vs {y.size} points")
    if x.size < 3:
        raise TooFewPoints(f"need at least 3 points, got {x.size}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantInput("correlation is undefined for a constant input")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# per-system aggregation


@dataclass(frozen=True, eq=False)
class SystemScore:
    system_id: str
    cer_mean: float | None
    mos_mean: float | None
    similarity_mean: float | None
    similarity_source_mean: float | None
    ci_half_widths: tuple[float | None, float | None, float | None]  # cer, mos, sim
    n_trials: tuple[int, int, int]  # cer, mos, sim(target)


def _measure_seed(seed: int, system_id: str, measure: str) -> int:
    digest = hashlib.blake2b(
        f"{system_id}\x1f{measure}".encode("utf-8"), digest_size=8
    ).digest()
    return int(np.random.SeedSequence(
        [seed, int.from_bytes(digest, "big")]
    ).generate_state(1)[0])


def aggregate_systems(
    judgments: JudgmentSet,
    transcripts: TranscriptionTable,
    n_resamples: int = 10000,
    level: float = 0.95,
    seed: int = 0,
) -> list[SystemScore]:
    """Per-system means over all pooled trials, with bootstrap CI half-widths.

    Expects catch-filtered judgments; catch trials themselves are skipped.
    Intelligibility trials are scored against their sentence's gold text
    (UnknownSentence when missing); similarity means cover target-reference
    trials, with source-reference trials reported separately.
    """
    cer: dict[str, list[float]] = {}
    mos: dict[str, list[float]] = {}
    sim_target: dict[str, list[float]] = {}
    sim_source: dict[str, list[float]] = {}
    systems: list[str] = []
    seen: set[str] = set()
    for r in judgments.records:
        if r.system_id not in seen:
            seen.add(r.system_id)
            systems.append(r.system_id)
        if r.is_catch:
            continue
        if r.task == "intelligibility":
            gold = transcripts.rows.get(r.sentence_id)
            if gold is None:
                raise UnknownSentence(
                    f"intelligibility trial references unknown sentence "
                    f"{r.sentence_id!r}"
                )
            cer.setdefault(r.system_id, []).append(
                character_error_rate(str(r.response), gold)
            )
        elif r.task == "naturalness":
            mos.setdefault(r.system_id, []).append(float(r.response))
        elif r.reference_type == "target":
            sim_target.setdefault(r.system_id, []).append(float(r.response))
        else:
            sim_source.setdefault(r.system_id, []).append(float(r.response))

    def mean_of(values: list[float] | None) -> float | None:
        if not values:
            return None
        return math.fsum(values) / len(values)

    def half_width(values: list[float] | None, system_id: str, measure: str):
        if not values:
            return None
        low, high = bootstrap_ci(
            values, n_resamples, level, seed=_measure_seed(seed, system_id, measure)
        )
        return (high - low) / 2.0

    scores = []
    for system_id in sorted(systems):
        c = cer.get(system_id)
        m = mos.get(system_id)
        st = sim_target.get(system_id)
        ss = sim_source.get(system_id)
        scores.append(
            SystemScore(
                system_id=system_id,
                cer_mean=mean_of(c),
                mos_mean=mean_of(m),
                similarity_mean=mean_of(st),
                similarity_source_mean=mean_of(ss),
                ci_half_widths=(
                    half_width(c, system_id, "cer"),
                    half_width(m, system_id, "mos"),
                    half_width(st, system_id, "similarity"),
                ),
                n_trials=(len(c or ()), len(m or ()), len(st or ())),
            )
        )
    return scores


# ---------------------------------------------------------------------------
# correlation report


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    pairs: dict[tuple[str, str, bool], float | None]
    n_systems: int


def correlation_report(
    scores: list[SystemScore],
    abx: dict[str, float],
    bitrate: dict[str, float],
    gold_system_id: str | None = None,
) -> CorrelationReport:
    """Pearson r across systems for the standard metric pairs.

    Computed over systems where both metrics are available; bitrate enters
    as its natural log.  When a gold system is flagged, each pair is
    reported twice: gold included (True) and excluded (False).  Pairs whose
    correlation is undefined (constant or too few points) map to None.
    """
    metrics: dict[str, dict[str, float]] = {}
    for s in scores:
        row: dict[str, float] = {}
        if s.cer_mean is not None:
            row["cer"] = s.cer_mean
        if s.mos_mean is not None:
            row["mos"] = s.mos_mean
        if s.similarity_mean is not None:
            row["similarity"] = s.similarity_mean
        if s.system_id in abx:
            row["abx"] = abx[s.system_id]
        rate = bitrate.get(s.system_id)
        if rate is not None and rate > 0:
            row["log_bitrate"] = math.log(rate)
        metrics[s.system_id] = row

    variants = (True,) if gold_system_id is None else (True, False)
    pairs: dict[tuple[str, str, bool], float | None] = {}
    for metric_a, metric_b in CORRELATION_PAIRS:
        for include_gold in variants:
            xs, ys = [], []
            for system_id in sorted(metrics):
                if not include_gold and system_id == gold_system_id:
                    continue
                row = metrics[system_id]
                if metric_a in row and metric_b in row:
                    xs.append(row[metric_a])
                    ys.append(row[metric_b])
            try:
                r = pearson_r(xs, ys)
            except (ConstantInput, TooFewPoints):
                r = None
            pairs[(metric_a, metric_b, include_gold)] = r
    return CorrelationReport(pairs=pairs, n_systems=len(scores))


def correlation_report_to_tsv(report: CorrelationReport) -> str:
    lines = ["metric_a\tmetric_b\tgold_included\tr"]
    for (a, b, included), r in report.pairs.items():
        value = "-" if r is None else f"{r:.6f}"
        lines.append(f"{a}\t{b}\t{'true' if included else 'false'}\t{value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# leaderboard


@dataclass(frozen=True, eq=False)
class Leaderboard:
    columns: tuple[str, ...]
    rows: tuple[dict, ...]


def build_leaderboard(
    scores: list[SystemScore],
    abx_results: dict[str, float] | None = None,
    bitrate_results: dict[str, float] | None = None,
    metadata: dict[str, dict[str, str]] | None = None,
) -> Leaderboard:
    """One row per system, sorted by CER ascending; missing cells stay None."""
    abx_results = abx_results or {}
    bitrate_results = bitrate_results or {}
    metadata = metadata or {}
    meta_columns = sorted({k for m in metadata.values() for k in m})
    columns = (
        "system_id", "bitrate", "abx_error", "cer", "cer_ci", "mos", "mos_ci",
        "similarity", "similarity_ci", "similarity_source", *meta_columns,
    )
    rows = []
    order = sorted(
        scores, key=lambda s: (s.cer_mean is None, s.cer_mean, s.system_id)
    )
    for s in order:
        row = {
            "system_id": s.system_id,
            "bitrate": bitrate_results.get(s.system_id),
            "abx_error": abx_results.get(s.system_id),
            "cer": s.cer_mean,
            "cer_ci": s.ci_half_widths[0],
            "mos": s.mos_mean,
            "mos_ci": s.ci_half_widths[1],
            "similarity": s.similarity_mean,
            "similarity_ci": s.ci_half_widths[2],
            "similarity_source": s.similarity_source_mean,
        }
        for k in meta_columns:
            row[k] = metadata.get(s.system_id, {}).get(k)
        rows.append(row)
    return Leaderboard(columns=columns, rows=tuple(rows))


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def leaderboard_to_tsv(board: Leaderboard) -> str:
    lines = ["\t".join(board.columns)]
    for row in board.rows:
        lines.append("\t".join(_format_cell(row[c]) for c in board.columns))
    return "\n".join(lines) + "\n"


def leaderboard_to_table(board: Leaderboard) -> str:
    cells = [list(board.columns)]
    for row in board.rows:
        cells.append([_format_cell(row[c]) for c in board.columns])
    widths = [max(len(r[i]) for r in cells) for i in range(len(board.columns))]
    lines = []
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def leaderboard_to_json(board: Leaderboard) -> str:
    def jsonable(value):
        if isinstance(value, float):
            return float(f"{value:.6f}")
        return value

    payload = {
        "systems": [
            {c: jsonable(row[c]) for c in board.columns} for row in board.rows
        ]
    }
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"

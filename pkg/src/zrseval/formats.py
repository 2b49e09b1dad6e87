"""Parse, validate, and serialize the toolkit's on-disk artifacts.

File formats (all UTF-8, LF line endings):

* embedding file — ``<item_id>.txt``, one frame per line, whitespace-separated
  decimal tokens;
* item manifest — TSV with header
  ``item_id  phone  left  right  speaker  duration_s``;
* transcriptions — TSV ``sentence_id<TAB>text``;
* judgments — CSV with header
  ``participant_id,task,system_id,sentence_id,response,is_catch,reference_type``.

All parsers are pure functions of their input text and the parsed values are
immutable, so everything here is safe to call and share across threads.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    BadRating,
    BadReferenceType,
    BadRow,
    BadTask,
    DuplicateItemId,
    DuplicateSentenceId,
    EmptyFile,
    EmptyGoldText,
    FormatError,
    MissingColumn,
    NonNumericToken,
    NonPositiveDuration,
    RaggedRows,
)

MANIFEST_COLUMNS = ("item_id", "phone", "left", "right", "speaker", "duration_s")
JUDGMENT_COLUMNS = (
    "participant_id",
    "task",
    "system_id",
    "sentence_id",
    "response",
    "is_catch",
    "reference_type",
)
TASKS = ("intelligibility", "naturalness", "similarity")
REFERENCE_TYPES = ("target", "source", "none")
RATING_TASKS = ("naturalness", "similarity")


def canonicalize_line(line: str) -> str:
    """Whitespace-normalize a raw frame line: single spaces, trimmed edges."""
    return " ".join(line.split())


# ---------------------------------------------------------------------------
# embedding files


@dataclass(frozen=True, eq=False)
class EmbeddingSequence:
    """One submitted test item: numeric frames plus their raw symbol strings.

    ``frames`` is a float64 array of shape (n_frames, dim).  ``symbols[i]``
    is the whitespace-normalized source line for ``frames[i]``; symbol
    identity is the literal token spelling, so "1.0" and "1.00" are distinct
    symbols even though they parse to the same number.
    """

    item_id: str
    frames: np.ndarray
    symbols: tuple[str, ...]

    def __post_init__(self):
        if self.frames.ndim != 2 or self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise ValueError("frames must be a nonempty 2-D array")
        if self.frames.shape[0] != len(self.symbols):
            raise ValueError("frames and symbols must have equal length")

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    def __len__(self) -> int:
        return self.frames.shape[0]


def parse_embedding_file(content: str, item_id: str) -> EmbeddingSequence:
    """Decode one embedding file: one frame per nonempty line.

    Raises EmptyFile, RaggedRows (first offending line), or NonNumericToken
    (line and column); non-finite tokens like ``nan``/``inf`` are rejected
    as NonNumericToken.  Blank lines are skipped.
    """
    frames: list[list[float]] = []
    symbols: list[str] = []
    dim = None
    for lineno, raw in enumerate(content.split("\n"), 1):
        tokens = raw.split()
        if not tokens:
            continue
        if dim is None:
            dim = len(tokens)
        elif len(tokens) != dim:
            raise RaggedRows(
                f"{item_id}: line {lineno} has {len(tokens)} tokens, expected {dim}"
            )
        row = []
        for col, tok in enumerate(tokens, 1):
            try:
                value = float(tok)
            except ValueError:
                raise NonNumericToken(
                    f"{item_id}: line {lineno}, column {col}: {tok!r} is not a decimal number"
                ) from None
            if not math.isfinite(value):
                raise NonNumericToken(
                    f"{item_id}: line {lineno}, column {col}: non-finite value {tok!r}"
                )
            row.append(value)
        frames.append(row)
        symbols.append(" ".join(tokens))
    if not frames:
        raise EmptyFile(f"{item_id}: no nonempty lines")
    return EmbeddingSequence(
        item_id=item_id,
        frames=np.asarray(frames, dtype=np.float64),
        symbols=tuple(symbols),
    )


def render_embedding_file(seq: EmbeddingSequence) -> str:
    """Inverse of parse_embedding_file, rendered from the symbol view."""
    return "\n".join(seq.symbols) + "\n"


# ---------------------------------------------------------------------------
# item manifest


@dataclass(frozen=True)
class ManifestEntry:
    item_id: str
    phone: str
    left: str
    right: str
    speaker: str
    duration_s: float


@dataclass(frozen=True)
class ItemManifest:
    entries: tuple[ManifestEntry, ...]

    def ids(self) -> tuple[str, ...]:
        return tuple(e.item_id for e in self.entries)

    def total_duration_s(self) -> float:
        return math.fsum(e.duration_s for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def parse_item_manifest(content: str) -> ItemManifest:
    """Parse the TSV item manifest; durations become float seconds."""
    lines = [ln.rstrip("\r") for ln in content.split("\n")]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise MissingColumn("manifest is empty, expected header "
                            + "\t".join(MANIFEST_COLUMNS))
    header = tuple(lines[0].split("\t"))
    if header != MANIFEST_COLUMNS:
        missing = [c for c in MANIFEST_COLUMNS if c not in header]
        raise MissingColumn(
            f"manifest header {header!r} does not match expected columns "
            f"{MANIFEST_COLUMNS!r}" + (f" (missing {missing})" if missing else "")
        )
    entries = []
    seen: set[str] = set()
    for lineno, ln in enumerate(lines[1:], 2):
        fields = ln.split("\t")
        if len(fields) != len(MANIFEST_COLUMNS):
            raise MissingColumn(
                f"manifest line {lineno}: {len(fields)} fields, expected "
                f"{len(MANIFEST_COLUMNS)}"
            )
        item_id, phone, left, right, speaker, dur_text = fields
        if item_id in seen:
            raise DuplicateItemId(f"manifest line {lineno}: duplicate item_id {item_id!r}")
        seen.add(item_id)
        try:
            duration = float(dur_text)
        except ValueError:
            raise NonPositiveDuration(
                f"manifest line {lineno}: duration_s {dur_text!r} is not a number"
            ) from None
        if not (math.isfinite(duration) and duration > 0):
            raise NonPositiveDuration(
                f"manifest line {lineno}: duration_s must be positive, got {dur_text!r}"
            )
        entries.append(ManifestEntry(item_id, phone, left, right, speaker, duration))
    return ItemManifest(entries=tuple(entries))


def serialize_item_manifest(manifest: ItemManifest) -> str:
    out = ["\t".join(MANIFEST_COLUMNS)]
    for e in manifest.entries:
        out.append(
            "\t".join((e.item_id, e.phone, e.left, e.right, e.speaker, repr(e.duration_s)))
        )
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# transcriptions


@dataclass(frozen=True)
class TranscriptionTable:
    rows: dict[str, str]

    def __len__(self) -> int:
        return len(self.rows)


def parse_transcription_table(content: str) -> TranscriptionTable:
    """Parse TSV ``sentence_id<TAB>text`` rows (text may itself contain tabs)."""
    rows: dict[str, str] = {}
    for lineno, raw in enumerate(content.split("\n"), 1):
        ln = raw.rstrip("\r")
        if ln == "":
            continue
        parts = ln.split("\t", 1)
        if len(parts) != 2:
            raise BadRow(f"transcriptions line {lineno}: expected sentence_id<TAB>text")
        sentence_id, text = parts
        if sentence_id in rows:
            raise DuplicateSentenceId(
                f"transcriptions line {lineno}: duplicate sentence_id {sentence_id!r}"
            )
        if text == "":
            raise EmptyGoldText(f"transcriptions line {lineno}: empty gold text")
        rows[sentence_id] = text
    return TranscriptionTable(rows=rows)


def serialize_transcription_table(table: TranscriptionTable) -> str:
    return "".join(f"{sid}\t{text}\n" for sid, text in table.rows.items())


# ---------------------------------------------------------------------------
# human judgments


@dataclass(frozen=True)
class JudgmentRecord:
    participant_id: str
    task: str
    system_id: str
    sentence_id: str
    response: str | int
    is_catch: bool
    reference_type: str


@dataclass(frozen=True)
class JudgmentSet:
    records: tuple[JudgmentRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


_BOOL_VALUES = {"true": True, "1": True, "false": False, "0": False}


def parse_judgment_table(content: str) -> JudgmentSet:
    """Parse the judgments CSV into typed records.

    Rating-task responses (naturalness, similarity) must be integers 1..5;
    intelligibility responses are kept as raw text.  ``reference_type`` must
    be ``none`` except on similarity trials, which carry ``target`` or
    ``source``.
    """
    reader = csv.reader(io.StringIO(content))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise MissingColumn("judgments file is empty") from None
    if header != JUDGMENT_COLUMNS:
        missing = [c for c in JUDGMENT_COLUMNS if c not in header]
        raise MissingColumn(
            f"judgments header {header!r} does not match expected columns "
            f"{JUDGMENT_COLUMNS!r}" + (f" (missing {missing})" if missing else "")
        )
    records = []
    for lineno, row in enumerate(reader, 2):
        if not row:
            continue
        if len(row) != len(JUDGMENT_COLUMNS):
            raise BadRow(f"judgments line {lineno}: {len(row)} fields, expected "
                         f"{len(JUDGMENT_COLUMNS)}")
        pid, task, system_id, sentence_id, response, catch_text, ref_type = row
        if task not in TASKS:
            raise BadTask(f"judgments line {lineno}: unknown task {task!r}")
        catch_key = catch_text.strip().lower()
        if catch_key not in _BOOL_VALUES:
            raise BadRow(f"judgments line {lineno}: is_catch {catch_text!r} is not a boolean")
        is_catch = _BOOL_VALUES[catch_key]
        if ref_type not in REFERENCE_TYPES:
            raise BadReferenceType(
                f"judgments line {lineno}: unknown reference_type {ref_type!r}"
            )
        if task == "similarity":
            if ref_type == "none":
                raise BadReferenceType(
                    f"judgments line {lineno}: similarity trials need reference_type "
                    "target or source"
                )
        elif ref_type != "none":
            raise BadReferenceType(
                f"judgments line {lineno}: reference_type must be none for task {task!r}"
            )
        value: str | int = response
        if task in RATING_TASKS:
            try:
                value = int(response)
            except ValueError:
                raise BadRating(
                    f"judgments line {lineno}: rating {response!r} is not an integer"
                ) from None
            if not 1 <= value <= 5:
                raise BadRating(
                    f"judgments line {lineno}: rating {value} outside 1..5"
                )
        records.append(
            JudgmentRecord(pid, task, system_id, sentence_id, value, is_catch, ref_type)
        )
    return JudgmentSet(records=tuple(records))


def serialize_judgment_table(judgments: JudgmentSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(JUDGMENT_COLUMNS)
    for r in judgments.records:
        writer.writerow(
            (
                r.participant_id,
                r.task,
                r.system_id,
                r.sentence_id,
                str(r.response),
                "true" if r.is_catch else "false",
                r.reference_type,
            )
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# submission validation


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    item_id: str  # "-" when not item-specific
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[Issue, ...]

    @classmethod
    def from_issues(cls, issues: Iterable[Issue]) -> "ValidationReport":
        issues = tuple(issues)
        return cls(ok=not any(i.severity == "error" for i in issues), issues=issues)

    def errors(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    def warnings(self) -> tuple[Issue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")


def validate_submission(
    manifest: ItemManifest, available: Mapping[str, str]
) -> ValidationReport:
    """Check a submission against the manifest.

    Errors: missing items, unparseable files, cross-file dimension mismatch
    (all files of one submission must share dim).  Warnings: files not named
    in the manifest, blank lines skipped during parsing.
    """
    issues: list[Issue] = []
    ref_dim = None
    for entry in manifest.entries:
        content = available.get(entry.item_id)
        if content is None:
            issues.append(Issue("error", entry.item_id, "missing item"))
            continue
        try:
            seq = parse_embedding_file(content, entry.item_id)
        except FormatError as exc:
            issues.append(Issue("error", entry.item_id, f"unparseable file: {exc}"))
            continue
        if any(ln.strip() == "" for ln in content.strip("\n").split("\n")):
            issues.append(Issue("warning", entry.item_id, "blank line skipped"))
        if ref_dim is None:
            ref_dim = seq.dim
        elif seq.dim != ref_dim:
            issues.append(
                Issue(
                    "error",
                    entry.item_id,
                    f"dimension mismatch: got {seq.dim}, expected {ref_dim}",
                )
            )
    manifest_ids = set(manifest.ids())
    for extra in sorted(set(available) - manifest_ids):
        issues.append(Issue("warning", extra, "file not in manifest"))
    return ValidationReport.from_issues(issues)


def load_submission_dir(path: str) -> dict[str, str]:
    """Read every ``*.txt`` file in a submission directory, keyed by stem."""
    out: dict[str, str] = {}
    for name in sorted(os.listdir(path)):
        if not name.endswith(".txt"):
            continue
        with open(os.path.join(path, name), encoding="utf-8") as fh:
            out[name[: -len(".txt")]] = fh.read()
    return out


def atomic_write_text(path: str, text: str) -> None:
    """Write to a temp file in the target directory, then rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

"""Synthetic corpora with known ground truth.

Generated corpora have controllable phone-class separation, per-speaker
offsets, and frame noise, so discrimination and bitrate behavior can be
predicted exactly: separable classes give zero discrimination error, zero
separation converges to chance, and the framewise/collapsed bitrate ratio
tracks the mean phone duration in frames.

Each item is a chunk of frames for its center phone (the left/right context
phones live in the manifest metadata only): frame = centroid(center) +
speaker offset + iid gaussian noise, with centroids scaled one-hot vectors
sitting ``class_separation`` apart.  Everything is a pure function of the
config; per-item streams are derived from (seed, item index), so output is
independent of generation schedule.  Written files use the exact submission
formats, so generated corpora are indistinguishable from real ones.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InfeasibleConfig
from .formats import (
    EmbeddingSequence,
    ItemManifest,
    JudgmentRecord,
    JudgmentSet,
    ManifestEntry,
    TranscriptionTable,
    atomic_write_text,
    render_embedding_file,
    serialize_item_manifest,
    serialize_transcription_table,
)

LEFT_CONTEXT = "cl"
RIGHT_CONTEXT = "cr"


@dataclass(frozen=True)
class SynthConfig:
    n_phones: int
    n_speakers: int
    n_items_per_cell: int  # tokens per (phone, speaker)
    frame_shift_s: float = 0.005
    phone_duration_frames: tuple[int, int] = (5, 15)  # min inclusive, max exclusive
    class_separation: float = 1.0
    speaker_shift: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0


@dataclass(frozen=True, eq=False)
class SynthCorpus:
    config: SynthConfig
    manifest: ItemManifest
    embeddings: dict[str, EmbeddingSequence]
    gold_labels: dict[str, tuple[str, ...]]  # per-frame phone label
    transcripts: TranscriptionTable  # collapsed gold phone sequence per item


def _check_config(config: SynthConfig) -> None:
    dmin, dmax = config.phone_duration_frames
    if config.n_phones < 2:
        raise InfeasibleConfig("need at least 2 phones for a minimal pair")
    if config.n_speakers < 2:
        raise InfeasibleConfig("need at least 2 speakers for a cross-speaker X")
    if config.n_items_per_cell < 1:
        raise InfeasibleConfig("need at least 1 token per (phone, speaker)")
    if dmin < 1 or dmin > dmax:
        raise InfeasibleConfig(
            f"bad phone_duration_frames {config.phone_duration_frames!r}"
        )
    if not (config.frame_shift_s > 0 and math.isfinite(config.frame_shift_s)):
        raise InfeasibleConfig("frame_shift_s must be positive")
    for name in ("class_separation", "speaker_shift", "noise_sigma"):
        value = getattr(config, name)
        if not (value >= 0 and math.isfinite(value)):
            raise InfeasibleConfig(f"{name} must be finite and >= 0")


def generate_corpus(config: SynthConfig) -> SynthCorpus:
    """Build the manifest, embeddings, and per-frame gold labels."""
    _check_config(config)
    phones = [f"p{k}" for k in range(config.n_phones)]
    speakers = [f"s{k:02d}" for k in range(config.n_speakers)]
    dmin, dmax = config.phone_duration_frames

    # Centroids are scaled one-hot vectors; pairwise distance equals
    # class_separation exactly (up to fp rounding).
    scale = config.class_separation / math.sqrt(2.0)
    centroids = np.eye(config.n_phones) * scale

    corpus_rng = np.random.default_rng(np.random.SeedSequence([config.seed]))
    offsets = {}
    for speaker in speakers:
        direction = corpus_rng.normal(size=config.n_phones)
        norm = np.linalg.norm(direction)
        offsets[speaker] = config.speaker_shift * direction / norm

    entries = []
    embeddings: dict[str, EmbeddingSequence] = {}
    gold_labels: dict[str, tuple[str, ...]] = {}
    transcripts: dict[str, str] = {}
    item_index = 0
    for phone_idx, phone in enumerate(phones):
        for speaker in speakers:
            for _ in range(config.n_items_per_cell):
                item_id = f"t{item_index:05d}"
                rng = np.random.default_rng(
                    np.random.SeedSequence([config.seed, item_index])
                )
                if dmax > dmin:
                    n_frames = int(rng.integers(dmin, dmax))
                else:
                    n_frames = dmin
                frames = np.tile(centroids[phone_idx] + offsets[speaker], (n_frames, 1))
                if config.noise_sigma > 0:
                    frames = frames + rng.normal(
                        0.0, config.noise_sigma, size=frames.shape
                    )
                symbols = tuple(
                    " ".join(repr(float(v)) for v in row) for row in frames
                )
                embeddings[item_id] = EmbeddingSequence(
                    item_id=item_id, frames=frames, symbols=symbols
                )
                gold_labels[item_id] = (phone,) * n_frames
                transcripts[item_id] = phone
                entries.append(
                    ManifestEntry(
                        item_id=item_id,
                        phone=phone,
                        left=LEFT_CONTEXT,
                        right=RIGHT_CONTEXT,
                        speaker=speaker,
                        duration_s=n_frames * config.frame_shift_s,
                    )
                )
                item_index += 1
    return SynthCorpus(
        config=config,
        manifest=ItemManifest(entries=tuple(entries)),
        embeddings=embeddings,
        gold_labels=gold_labels,
        transcripts=TranscriptionTable(rows=transcripts),
    )


def gold_onehot_encoding(corpus: SynthCorpus) -> dict[str, EmbeddingSequence]:
    """Replace every frame by the one-hot vector of its gold phone label."""
    phones = [f"p{k}" for k in range(corpus.config.n_phones)]
    phone_index = {p: i for i, p in enumerate(phones)}
    onehot_symbols = {
        p: " ".join("1" if i == phone_index[p] else "0" for i in range(len(phones)))
        for p in phones
    }
    out = {}
    for item_id, labels in corpus.gold_labels.items():
        frames = np.zeros((len(labels), len(phones)))
        for row, label in enumerate(labels):
            frames[row, phone_index[label]] = 1.0
        out[item_id] = EmbeddingSequence(
            item_id=item_id,
            frames=frames,
            symbols=tuple(onehot_symbols[label] for label in labels),
        )
    return out


def collapse_runs(seq: EmbeddingSequence) -> EmbeddingSequence:
    """Reduce maximal runs of identical symbols to a single occurrence."""
    keep = [0]
    for i in range(1, len(seq.symbols)):
        if seq.symbols[i] != seq.symbols[i - 1]:
            keep.append(i)
    return EmbeddingSequence(
        item_id=seq.item_id,
        frames=seq.frames[keep],
        symbols=tuple(seq.symbols[i] for i in keep),
    )


# ---------------------------------------------------------------------------
# synthetic human judgments (for end-to-end pipeline runs)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _corrupt(text: str, error_rate: float, rng: np.random.Generator) -> str:
    out = []
    for ch in text:
        if rng.random() < error_rate:
            if rng.random() < 0.5:
                continue  # deletion
            out.append(_LETTERS[int(rng.integers(0, len(_LETTERS)))])
        else:
            out.append(ch)
    return "".join(out)


def generate_judgments(
    transcripts: TranscriptionTable,
    systems: Mapping[str, float],
    n_participants: int = 6,
    trials_per_task: int = 2,
    n_catch: int = 3,
    seed: int = 0,
) -> JudgmentSet:
    """Synthesize a plausible judgment table for the given systems.

    ``systems`` maps system_id to a quality knob in [0, 1]: higher quality
    means cleaner transcriptions and higher ratings, so CER/MOS/Similarity
    end up correlated across systems.  Catch trials are near-perfect
    transcriptions (all participants pass the attention check).
    """
    digest = hashlib.blake2b(b"judgments", digest_size=8).digest()
    rng = np.random.default_rng(
        np.random.SeedSequence([seed, int.from_bytes(digest, "big")])
    )
    sentences = sorted(transcripts.rows)
    if not sentences:
        raise InfeasibleConfig("transcripts are empty")

    def rating(center: float) -> int:
        raw = round(center + rng.normal(0.0, 0.5))
        return int(min(5, max(1, raw)))

    sentence_cursor = 0

    def next_sentence() -> str:
        nonlocal sentence_cursor
        s = sentences[sentence_cursor % len(sentences)]
        sentence_cursor += 1
        return s

    records = []
    system_ids = sorted(systems)
    for p in range(n_participants):
        pid = f"judge{p:02d}"
        for k in range(n_catch):
            sid = next_sentence()
            records.append(
                JudgmentRecord(
                    pid, "intelligibility", system_ids[k % len(system_ids)], sid,
                    transcripts.rows[sid], True, "none",
                )
            )
        for system_id in system_ids:
            q = systems[system_id]
            for _ in range(trials_per_task):
                sid = next_sentence()
                records.append(
                    JudgmentRecord(
                        pid, "intelligibility", system_id, sid,
                        _corrupt(transcripts.rows[sid], (1.0 - q) * 0.6, rng),
                        False, "none",
                    )
                )
            for _ in range(trials_per_task):
                records.append(
                    JudgmentRecord(
                        pid, "naturalness", system_id, next_sentence(),
                        rating(1.0 + 4.0 * q), False, "none",
                    )
                )
            for _ in range(trials_per_task):
                records.append(
                    JudgmentRecord(
                        pid, "similarity", system_id, next_sentence(),
                        rating(1.0 + 4.0 * q), False, "target",
                    )
                )
            records.append(
                JudgmentRecord(
                    pid, "similarity", system_id, next_sentence(),
                    rating(1.0 + 1.5 * q), False, "source",
                )
            )
    return JudgmentSet(records=tuple(records))


# ---------------------------------------------------------------------------
# writing a corpus to disk


def write_submission(embeddings: Mapping[str, EmbeddingSequence], path: str) -> None:
    os.makedirs(path, exist_ok=True)
    for item_id in sorted(embeddings):
        atomic_write_text(
            os.path.join(path, f"{item_id}.txt"),
            render_embedding_file(embeddings[item_id]),
        )


def write_corpus(corpus: SynthCorpus, out_dir: str) -> None:
    """Write manifest.tsv and transcripts.tsv under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    atomic_write_text(
        os.path.join(out_dir, "manifest.tsv"), serialize_item_manifest(corpus.manifest)
    )
    atomic_write_text(
        os.path.join(out_dir, "transcripts.tsv"),
        serialize_transcription_table(corpus.transcripts),
    )

"""Frame- and sequence-level distances.

Frame metrics: cosine divergence (1 - cosine similarity, range [0, 2]) and
KL divergence in bits for probability-vector frames.  Sequence distances:
DTW averaged along the optimal alignment path, and normalized Levenshtein
edit distance over the raw symbol strings.

All operations are pure and safe for unlimited parallel invocation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._kernels import dtw_path_average, levenshtein_ints
from .errors import (
    BothEmpty,
    DimMismatch,
    EmptySequence,
    NotAProbabilityVector,
    ZeroVector,
)
from .formats import EmbeddingSequence

KL_EPSILON = 1e-10
PROB_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FrameMetric:
    kind: str  # "cosine" | "kl"

    def __post_init__(self):
        if self.kind not in ("cosine", "kl"):
            raise ValueError(f"unknown frame metric {self.kind!r}")


@dataclass(frozen=True)
class SequenceDistance:
    kind: str  # "dtw" | "levenshtein"
    metric: FrameMetric | None = None

    def __post_init__(self):
        if self.kind not in ("dtw", "levenshtein"):
            raise ValueError(f"unknown sequence distance {self.kind!r}")
        if (self.kind == "dtw") != (self.metric is not None):
            raise ValueError("dtw needs a frame metric, levenshtein takes none")

    @property
    def flag(self) -> str:
        if self.kind == "levenshtein":
            return "levenshtein"
        return f"dtw-{self.metric.kind}"


DTW_COSINE = SequenceDistance("dtw", FrameMetric("cosine"))
DTW_KL = SequenceDistance("dtw", FrameMetric("kl"))
LEVENSHTEIN = SequenceDistance("levenshtein")

DISTANCE_FLAGS = {
    "dtw-cosine": DTW_COSINE,
    "dtw-kl": DTW_KL,
    "levenshtein": LEVENSHTEIN,
}


def distance_from_flag(flag: str) -> SequenceDistance:
    try:
        return DISTANCE_FLAGS[flag]
    except KeyError:
        raise ValueError(
            f"unknown distance {flag!r}, expected one of {sorted(DISTANCE_FLAGS)}"
        ) from None


# ---------------------------------------------------------------------------
# frame metrics
#
# Cosine divergence is computed as half the squared distance of the
# L2-normalized vectors, which equals 1 - cos(x, y) but is exact (0.0) for
# bit-identical frames and avoids cancellation near parallel vectors.
# KL is expanded per element so that identical rows give exactly 0.0.


def _cosine_prepare(frames: np.ndarray) -> np.ndarray:
    # pre-scale rows by max |entry| so the squared norm cannot under/overflow
    scale = np.max(np.abs(frames), axis=1, keepdims=True)
    if np.any(scale == 0.0):
        bad = int(np.argmax(scale[:, 0] == 0.0))
        raise ZeroVector(f"all-zero vector at frame {bad}")
    scaled = frames / scale
    norms = np.sqrt((scaled * scaled).sum(axis=1))
    return scaled / norms[:, None]


def _cosine_combine(xn: np.ndarray, yn: np.ndarray) -> np.ndarray:
    diff = xn[:, None, :] - yn[None, :, :]
    div = 0.5 * (diff * diff).sum(axis=-1)
    np.clip(div, 0.0, 2.0, out=div)
    return div


def _prob_prepare(frames: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Validate probability rows, renormalize, and take the floored log2."""
    if np.any(frames < 0.0):
        raise NotAProbabilityVector("negative entry in probability vector")
    sums = frames.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > PROB_SUM_TOLERANCE):
        bad = int(np.argmax(np.abs(sums - 1.0) > PROB_SUM_TOLERANCE))
        raise NotAProbabilityVector(
            f"row {bad} sums to {sums[bad]!r}, expected 1 within {PROB_SUM_TOLERANCE}"
        )
    p = frames / sums[:, None]
    logp = np.log2(np.maximum(p, KL_EPSILON))
    return p, logp


def _kl_combine(p: np.ndarray, logp: np.ndarray, logq: np.ndarray) -> np.ndarray:
    # sum_k p_k * (log2 p_k - log2 max(q_k, eps)); p_k = 0 terms vanish since
    # logp is floored (finite) and 0 * finite == 0.
    div = (p[:, None, :] * (logp[:, None, :] - logq[None, :, :])).sum(axis=-1)
    np.maximum(div, 0.0, out=div)
    return div


def _as_2d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def cosine_divergence(x, y) -> float:
    """1 - cosine similarity of two vectors, clamped to [0, 2]."""
    xa, ya = _as_2d(x), _as_2d(y)
    if xa.shape[1] != ya.shape[1]:
        raise DimMismatch(f"dim {xa.shape[1]} vs {ya.shape[1]}")
    return float(_cosine_combine(_cosine_prepare(xa), _cosine_prepare(ya))[0, 0])


def kl_divergence(p, q) -> float:
    """KL(p || q) in bits, with the denominator floored at 1e-10.

    Inputs must be nonnegative and sum to 1 within 1e-6; they are
    renormalized to sum exactly 1 before use.  Terms with p_i = 0
    contribute 0, and the result is clamped at 0.
    """
    pa, qa = _as_2d(p), _as_2d(q)
    if pa.shape[1] != qa.shape[1]:
        raise DimMismatch(f"dim {pa.shape[1]} vs {qa.shape[1]}")
    pn, logp = _prob_prepare(pa)
    _, logq = _prob_prepare(qa)
    return float(_kl_combine(pn, logp, logq)[0, 0])


def frame_divergence_matrix(
    a: EmbeddingSequence, b: EmbeddingSequence, metric: FrameMetric
) -> np.ndarray:
    """Pairwise frame divergences, shape (len(a), len(b))."""
    if a.dim != b.dim:
        raise DimMismatch(f"{a.item_id}: dim {a.dim} vs {b.item_id}: dim {b.dim}")
    if metric.kind == "cosine":
        return _cosine_combine(_cosine_prepare(a.frames), _cosine_prepare(b.frames))
    pn, logp = _prob_prepare(a.frames)
    _, logq = _prob_prepare(b.frames)
    return _kl_combine(pn, logp, logq)


# ---------------------------------------------------------------------------
# sequence distances


def dtw_distance(
    a: EmbeddingSequence, b: EmbeddingSequence, metric: FrameMetric
) -> float:
    """Path-averaged DTW divergence between two embedding sequences.

    Steps are (1,0), (0,1), (1,1); each step pays the divergence of the
    newly aligned frame pair.  The optimal path minimizes total cost, ties
    broken by preferring the diagonal, then the (1,0) step, and the return
    value is total cost / number of aligned pairs on that path.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptySequence("dtw needs nonempty sequences")
    total, path_len = dtw_path_average(frame_divergence_matrix(a, b, metric))
    return total / path_len


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    table: dict = {}
    codes_a = np.fromiter(
        (table.setdefault(s, len(table)) for s in a), dtype=np.int64, count=len(a)
    )
    codes_b = np.fromiter(
        (table.setdefault(s, len(table)) for s in b), dtype=np.int64, count=len(b)
    )
    return int(levenshtein_ints(codes_a, codes_b))


def normalized_levenshtein(a: Sequence, b: Sequence) -> float:
    """levenshtein(a, b) / max(len(a), len(b)); in [0, 1]."""
    if len(a) == 0 and len(b) == 0:
        raise BothEmpty("normalized levenshtein is undefined for two empty sequences")
    return levenshtein(a, b) / max(len(a), len(b))


def sequence_distance_fn(
    dist: SequenceDistance,
) -> Callable[[EmbeddingSequence, EmbeddingSequence], float]:
    """Bind a SequenceDistance selection to a callable on embedding sequences."""
    if dist.kind == "dtw":
        metric = dist.metric
        return lambda a, b: dtw_distance(a, b, metric)
    return lambda a, b: normalized_levenshtein(a.symbols, b.symbols)

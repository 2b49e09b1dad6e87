"""Discrimination task construction, triple scoring, and aggregation.

A cell pairs two triphone types that differ only in the center phone; A and
B are tokens of the two types from one speaker, X tokens of the first type
from a different speaker.  A triple (a, b, x) counts as correct when
d(a, x) < d(b, x), half-correct on an exact tie.  Cell credits are exact
rational counts, so scores and the aggregated error rate are independent of
execution and summation order.

Aggregation hierarchy: mean over speaker assignments within a directed type
pair, mean of the two directions, mean over shared contexts per unordered
center-phone pair, then the unweighted mean over center-phone pairs.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from ._kernels import dtw_path_average, levenshtein_ints
from .distance import (
    SequenceDistance,
    _cosine_combine,
    _cosine_prepare,
    _kl_combine,
    _prob_prepare,
)
from .errors import DimMismatch, MissingEmbedding, NoCells
from .formats import EmbeddingSequence, ItemManifest


@dataclass(frozen=True, order=True)
class Triphone:
    left: str
    center: str
    right: str


@dataclass(frozen=True)
class AbxCell:
    t1: Triphone  # the type X belongs to
    t2: Triphone
    speaker_ab: str
    speaker_x: str
    a_items: tuple[str, ...]  # tokens of t1 by speaker_ab
    b_items: tuple[str, ...]  # tokens of t2 by speaker_ab
    x_items: tuple[str, ...]  # tokens of t1 by speaker_x

    @property
    def n_triples(self) -> int:
        return len(self.a_items) * len(self.b_items) * len(self.x_items)


@dataclass(frozen=True)
class PairSummary:
    center1: str
    center2: str
    contexts: int
    cells: int
    error: float


@dataclass(frozen=True, eq=False)
class AbxResult:
    global_error_rate: float
    per_pair: dict[tuple[str, str], float]
    cells_scored: int
    triples_scored: int
    pair_table: tuple[PairSummary, ...]


def build_abx_task(manifest: ItemManifest) -> list[AbxCell]:
    """Enumerate every valid cell; returns [] when the manifest admits none."""
    # (left, right) -> center -> speaker -> item ids in manifest order
    index: dict[tuple[str, str], dict[str, dict[str, list[str]]]] = {}
    for e in manifest.entries:
        ctx = index.setdefault((e.left, e.right), {})
        ctx.setdefault(e.phone, {}).setdefault(e.speaker, []).append(e.item_id)

    cells: list[AbxCell] = []
    for (left, right), by_center in sorted(index.items()):
        centers = sorted(by_center)
        for i, c1 in enumerate(centers):
            for c2 in centers[i + 1:]:
                for target, other in ((c1, c2), (c2, c1)):
                    t1 = Triphone(left, target, right)
                    t2 = Triphone(left, other, right)
                    target_speakers = by_center[target]
                    other_speakers = by_center[other]
                    for spk_ab in sorted(set(target_speakers) & set(other_speakers)):
                        for spk_x in sorted(target_speakers):
                            if spk_x == spk_ab:
                                continue
                            cells.append(
                                AbxCell(
                                    t1=t1,
                                    t2=t2,
                                    speaker_ab=spk_ab,
                                    speaker_x=spk_x,
                                    a_items=tuple(target_speakers[spk_ab]),
                                    b_items=tuple(other_speakers[spk_ab]),
                                    x_items=tuple(target_speakers[spk_x]),
                                )
                            )
    return cells


# ---------------------------------------------------------------------------
# scoring


def _cell_token(cell: AbxCell) -> bytes:
    parts = (
        cell.t1.left, cell.t1.center, cell.t1.right, cell.t2.center,
        cell.speaker_ab, cell.speaker_x,
    )
    return "\x1f".join(parts).encode("utf-8")


def _cell_seed(seed: int, cell: AbxCell) -> np.random.SeedSequence:
    digest = hashlib.blake2b(_cell_token(cell), digest_size=8).digest()
    return np.random.SeedSequence([seed, int.from_bytes(digest, "big")])


def _sample_triples(
    cell: AbxCell, cap: int, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded uniform subsample of triple indices, decoded to (ia, ib, ix)."""
    nb, nx = len(cell.b_items), len(cell.x_items)
    rng = np.random.default_rng(_cell_seed(seed, cell))
    flat = np.sort(rng.choice(cell.n_triples, size=cap, replace=False))
    ia, rem = np.divmod(flat, nb * nx)
    ib, ix = np.divmod(rem, nx)
    return ia, ib, ix


class _PreparedStore:
    """Per-item precomputed arrays so each pair job is a cheap combine.

    The prepared pieces are produced by the same functions the direct
    distance operations use, so cached scoring is bit-identical to calling
    dtw_distance / normalized_levenshtein per pair.
    """

    def __init__(self, embeddings: Mapping[str, EmbeddingSequence], dist: SequenceDistance):
        self._embeddings = embeddings
        self._dist = dist
        self._cache: dict[str, object] = {}
        self._symbol_codes: dict[str, int] = {}

    def sequence(self, item_id: str) -> EmbeddingSequence:
        seq = self._embeddings.get(item_id)
        if seq is None:
            raise MissingEmbedding(f"item {item_id!r} not in submission")
        return seq

    def prepared(self, item_id: str):
        out = self._cache.get(item_id)
        if out is None:
            seq = self.sequence(item_id)
            kind = self._dist.kind
            if kind == "dtw" and self._dist.metric.kind == "cosine":
                out = (_cosine_prepare(seq.frames),)
            elif kind == "dtw":
                p, logp = _prob_prepare(seq.frames)
                out = (p, logp)
            else:
                codes = np.fromiter(
                    (self._symbol_codes.setdefault(s, len(self._symbol_codes))
                     for s in seq.symbols),
                    dtype=np.int64,
                    count=len(seq.symbols),
                )
                out = (codes,)
            self._cache[item_id] = out
        return out

    def pair_distance(self, first: str, second: str) -> float:
        a = self.sequence(first)
        b = self.sequence(second)
        if self._dist.kind == "dtw":
            if a.dim != b.dim:
                raise DimMismatch(
                    f"{a.item_id}: dim {a.dim} vs {b.item_id}: dim {b.dim}"
                )
            if self._dist.metric.kind == "cosine":
                (xn,) = self.prepared(first)
                (yn,) = self.prepared(second)
                div = _cosine_combine(xn, yn)
            else:
                p, logp = self.prepared(first)
                _, logq = self.prepared(second)
                div = _kl_combine(p, logp, logq)
            total, path_len = dtw_path_average(div)
            return total / path_len
        (ca,) = self.prepared(first)
        (cb,) = self.prepared(second)
        return int(levenshtein_ints(ca, cb)) / max(len(ca), len(cb))


def _parallel_map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def score_cells(
    cells: list[AbxCell],
    embeddings: Mapping[str, EmbeddingSequence],
    dist: SequenceDistance,
    threads: int = 1,
    max_triples_per_cell: int | None = None,
    seed: int = 0,
    pair_distance: Callable[[EmbeddingSequence, EmbeddingSequence], float] | None = None,
) -> tuple[list[tuple[AbxCell, Fraction]], int]:
    """Score all cells; returns ((cell, score) list, triples scored).

    Distances for the token-vs-X comparisons are computed once per unique
    ordered item pair (shared across cells) and may be computed by a thread
    pool; results are keyed, so any thread count yields identical output.
    ``pair_distance`` overrides the distance computation (used for
    monotone-transform checks); otherwise the prepared-store fast path is
    used, which is bit-identical to the direct per-pair operations.
    """
    store = _PreparedStore(embeddings, dist)
    subsampled: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    needed: set[tuple[str, str]] = set()
    for idx, cell in enumerate(cells):
        for item_id in (*cell.a_items, *cell.b_items, *cell.x_items):
            store.sequence(item_id)  # fail fast on missing items
        if max_triples_per_cell is not None and cell.n_triples > max_triples_per_cell:
            ia, ib, ix = _sample_triples(cell, max_triples_per_cell, seed)
            subsampled[idx] = (ia, ib, ix)
            for t in range(len(ia)):
                needed.add((cell.a_items[ia[t]], cell.x_items[ix[t]]))
                needed.add((cell.b_items[ib[t]], cell.x_items[ix[t]]))
        else:
            for x in cell.x_items:
                needed.update((a, x) for a in cell.a_items)
                needed.update((b, x) for b in cell.b_items)

    if pair_distance is None:
        compute = lambda pair: store.pair_distance(pair[0], pair[1])
    else:
        compute = lambda pair: pair_distance(
            store.sequence(pair[0]), store.sequence(pair[1])
        )
    pair_list = sorted(needed)
    values = _parallel_map(compute, pair_list, threads)
    d = dict(zip(pair_list, values))

    scored: list[tuple[AbxCell, Fraction]] = []
    triples_total = 0
    for idx, cell in enumerate(cells):
        if idx in subsampled:
            ia, ib, ix = subsampled[idx]
            dax = np.array(
                [d[(cell.a_items[i], cell.x_items[k])] for i, k in zip(ia, ix)]
            )
            dbx = np.array(
                [d[(cell.b_items[j], cell.x_items[k])] for j, k in zip(ib, ix)]
            )
            wins = int(np.count_nonzero(dax < dbx))
            ties = int(np.count_nonzero(dax == dbx))
            n = len(ia)
        else:
            da = np.array(
                [[d[(a, x)] for x in cell.x_items] for a in cell.a_items]
            )
            db = np.array(
                [[d[(b, x)] for x in cell.x_items] for b in cell.b_items]
            )
            cmp_a = da[:, None, :]
            cmp_b = db[None, :, :]
            wins = int(np.count_nonzero(cmp_a < cmp_b))
            ties = int(np.count_nonzero(cmp_a == cmp_b))
            n = cell.n_triples
        scored.append((cell, Fraction(2 * wins + ties, 2 * n)))
        triples_total += n
    return scored, triples_total


def score_cell(
    cell: AbxCell,
    embeddings: Mapping[str, EmbeddingSequence],
    dist: SequenceDistance,
) -> Fraction:
    """Mean credit over all (a, b, x) triples of one cell; exact rational."""
    scored, _ = score_cells([cell], embeddings, dist)
    return scored[0][1]


# ---------------------------------------------------------------------------
# aggregation


def _mean(values: list[Fraction]) -> Fraction:
    return sum(values, start=Fraction(0)) / len(values)


def aggregate(
    cell_scores: list[tuple[AbxCell, Fraction]],
    triples_scored: int | None = None,
) -> AbxResult:
    """Fold cell scores up the speaker/direction/context/pair hierarchy."""
    if not cell_scores:
        raise NoCells("no cells to aggregate")

    directed: dict[tuple[Triphone, Triphone], list[Fraction]] = {}
    for cell, score in cell_scores:
        directed.setdefault((cell.t1, cell.t2), []).append(Fraction(score))

    # (context, unordered center pair) -> direction means
    sym: dict[tuple[tuple[str, str], tuple[str, str]], list[Fraction]] = {}
    for (t1, t2), scores in sorted(directed.items(), key=lambda kv: kv[0]):
        ctx = (t1.left, t1.right)
        pair = tuple(sorted((t1.center, t2.center)))
        sym.setdefault((ctx, pair), []).append(_mean(scores))

    by_pair: dict[tuple[str, str], list[Fraction]] = {}
    for (ctx, pair), direction_means in sorted(sym.items()):
        by_pair.setdefault(pair, []).append(_mean(direction_means))

    cell_counts: dict[tuple[str, str], int] = {}
    for cell, _ in cell_scores:
        pair = tuple(sorted((cell.t1.center, cell.t2.center)))
        cell_counts[pair] = cell_counts.get(pair, 0) + 1

    pair_scores = {pair: _mean(ctx_means) for pair, ctx_means in by_pair.items()}
    global_score = _mean([pair_scores[p] for p in sorted(pair_scores)])

    per_pair = {pair: float(1 - s) for pair, s in pair_scores.items()}
    table = tuple(
        PairSummary(
            center1=pair[0],
            center2=pair[1],
            contexts=len(by_pair[pair]),
            cells=cell_counts[pair],
            error=per_pair[pair],
        )
        for pair in sorted(pair_scores)
    )
    if triples_scored is None:
        triples_scored = sum(cell.n_triples for cell, _ in cell_scores)
    return AbxResult(
        global_error_rate=float(1 - global_score),
        per_pair=per_pair,
        cells_scored=len(cell_scores),
        triples_scored=triples_scored,
        pair_table=table,
    )


def evaluate_abx(
    manifest: ItemManifest,
    embeddings: Mapping[str, EmbeddingSequence],
    dist: SequenceDistance,
    threads: int = 1,
    max_triples_per_cell: int | None = None,
    seed: int = 0,
) -> AbxResult:
    """Build the task from the manifest, score every cell, and aggregate."""
    cells = build_abx_task(manifest)
    if not cells:
        raise NoCells("manifest admits no valid cell (need a cross-speaker "
                      "minimal pair with tokens on both sides)")
    scored, triples = score_cells(
        cells, embeddings, dist,
        threads=threads, max_triples_per_cell=max_triples_per_cell, seed=seed,
    )
    return aggregate(scored, triples_scored=triples)

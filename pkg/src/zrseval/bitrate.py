"""Symbol inventory and entropy-based bitrate over a whole submission.

A dictionary of distinct symbol strings is built over every frame of every
submitted item (the unit of analysis is the full test set).  The bitrate is
n * H / D: symbol count times empirical symbol entropy in bits, divided by
the total audio duration in seconds taken from the manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import EmptyInput, NonPositiveDuration
from .formats import EmbeddingSequence


@dataclass(frozen=True)
class SymbolInventory:
    counts: dict[str, int]
    n: int

    @property
    def distinct(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class BitrateResult:
    bitrate_bits_per_s: float
    entropy_bits_per_symbol: float
    n: int
    distinct: int
    duration_s: float


def build_symbol_inventory(sequences: Iterable[EmbeddingSequence]) -> SymbolInventory:
    """Count canonical symbol strings over all frames of all sequences."""
    counts: dict[str, int] = {}
    n = 0
    for seq in sequences:
        for sym in seq.symbols:
            counts[sym] = counts.get(sym, 0) + 1
            n += 1
    if n == 0:
        raise EmptyInput("no sequences given")
    return SymbolInventory(counts=counts, n=n)


def merge_inventories(a: SymbolInventory, b: SymbolInventory) -> SymbolInventory:
    """Pool two inventories; commutative and associative on the counts."""
    counts = dict(a.counts)
    for sym, c in b.counts.items():
        counts[sym] = counts.get(sym, 0) + c
    return SymbolInventory(counts=counts, n=a.n + b.n)


def entropy(inv: SymbolInventory) -> float:
    """Empirical plug-in entropy H = -sum p log2 p, in bits per symbol.

    Terms are summed in count-sorted order, so the value depends only on
    the multiset of counts: invariant under symbol renaming and under the
    order the inventory was built in.
    """
    counts = np.sort(np.fromiter(inv.counts.values(), dtype=np.float64))
    p = counts / inv.n
    return float(0.0 - (p * np.log2(p)).sum())


def bitrate(inv: SymbolInventory, duration_s: float) -> BitrateResult:
    """B = n * H / duration_s, with duration summed over the manifest."""
    if not duration_s > 0:
        raise NonPositiveDuration(f"duration_s must be positive, got {duration_s!r}")
    h = entropy(inv)
    return BitrateResult(
        bitrate_bits_per_s=inv.n * h / duration_s,
        entropy_bits_per_symbol=h,
        n=inv.n,
        distinct=inv.distinct,
        duration_s=duration_s,
    )

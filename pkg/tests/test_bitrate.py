import math

import numpy as np
import pytest

from zrseval import errors
from zrseval.bitrate import (
    bitrate,
    build_symbol_inventory,
    entropy,
    merge_inventories,
)
from zrseval.formats import EmbeddingSequence


def seq_from_symbols(symbols, item_id="x"):
    # numeric stand-ins; the inventory only reads the symbol strings
    frames = np.arange(len(symbols), dtype=np.float64)[:, None]
    return EmbeddingSequence(item_id=item_id, frames=frames, symbols=tuple(symbols))


class TestBuildSymbolInventory:
    def test_single_sequence_counts(self):
        inv = build_symbol_inventory([seq_from_symbols(["a", "b", "a", "b"])])
        assert inv.counts == {"a": 2, "b": 2}
        assert inv.n == 4
        assert inv.distinct == 2

    def test_cross_file_pooling(self):
        inv = build_symbol_inventory(
            [seq_from_symbols(["a"], "1"), seq_from_symbols(["a"], "2")]
        )
        assert inv.counts == {"a": 2}
        assert inv.n == 2

    def test_literal_string_identity(self):
        inv = build_symbol_inventory([seq_from_symbols(["1.0 0.0", "1.00 0.0"])])
        assert inv.distinct == 2

    def test_empty_input(self):
        with pytest.raises(errors.EmptyInput):
            build_symbol_inventory([])


class TestEntropy:
    def test_degenerate_is_zero(self):
        inv = build_symbol_inventory([seq_from_symbols(["z"] * 10)])
        assert entropy(inv) == 0.0

    def test_uniform_over_two(self):
        inv = build_symbol_inventory([seq_from_symbols(["a", "b", "a", "b"])])
        assert entropy(inv) == 1.0

    def test_uniform_over_eight(self):
        inv = build_symbol_inventory([seq_from_symbols(list("abcdefgh"))])
        assert entropy(inv) == 3.0

    def test_bounds(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            symbols = [f"s{k}" for k in rng.integers(0, 6, size=rng.integers(1, 40))]
            inv = build_symbol_inventory([seq_from_symbols(symbols)])
            h = entropy(inv)
            assert 0.0 <= h <= math.log2(inv.distinct) + 1e-12

    def test_invariant_under_renaming(self):
        rng = np.random.default_rng(1)
        symbols = [f"s{k}" for k in rng.integers(0, 5, size=60)]
        renamed = [f"weird-{s}-name" for s in symbols]
        h1 = entropy(build_symbol_inventory([seq_from_symbols(symbols)]))
        h2 = entropy(build_symbol_inventory([seq_from_symbols(renamed)]))
        assert h1 == h2


class TestBitrate:
    def test_hand_case(self):
        inv = build_symbol_inventory([seq_from_symbols(["a", "b", "a", "b"])])
        result = bitrate(inv, 2.0)
        assert result.bitrate_bits_per_s == pytest.approx(2.0, rel=1e-9)
        assert result.entropy_bits_per_symbol == 1.0
        assert result.n == 4

    def test_constant_stream_is_zero(self):
        inv = build_symbol_inventory([seq_from_symbols(["k"] * 50)])
        assert bitrate(inv, 7.3).bitrate_bits_per_s == 0.0

    def test_non_positive_duration(self):
        inv = build_symbol_inventory([seq_from_symbols(["a"])])
        with pytest.raises(errors.NonPositiveDuration):
            bitrate(inv, 0.0)

    def test_result_invariant(self):
        rng = np.random.default_rng(2)
        symbols = [f"s{k}" for k in rng.integers(0, 9, size=100)]
        inv = build_symbol_inventory([seq_from_symbols(symbols)])
        r = bitrate(inv, 3.7)
        assert r.bitrate_bits_per_s == pytest.approx(
            r.n * r.entropy_bits_per_symbol / r.duration_s, rel=1e-9
        )


def test_count_additivity_of_merge():
    rng = np.random.default_rng(3)
    symbols = [f"s{k}" for k in rng.integers(0, 7, size=80)]
    half = len(symbols) // 2
    first = build_symbol_inventory([seq_from_symbols(symbols[:half])])
    second = build_symbol_inventory([seq_from_symbols(symbols[half:])])
    merged = merge_inventories(first, second)
    whole = build_symbol_inventory([seq_from_symbols(symbols)])
    assert merged.counts == whole.counts
    assert merged.n == whole.n
    assert entropy(merged) == entropy(whole)
    # merge is commutative
    swapped = merge_inventories(second, first)
    assert swapped.counts == whole.counts

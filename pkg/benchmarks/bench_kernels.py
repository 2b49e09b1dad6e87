#!/usr/bin/env python3
"""Benchmark the compiled DP kernels against the pure-Python fallback.

Times dtw_path_average and levenshtein_ints on a range of sequence lengths,
checks that both backends return identical results, and reports speedups.
Also times a full discrimination evaluation on a synthetic corpus with the
currently selected backend.

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from zrseval._kernels import BACKEND, _dp_py  # noqa: E402

try:
    from zrseval._kernels import _dp as compiled
except ImportError:
    compiled = None


def time_call(fn, args_list, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dtw(repeats):
    rng = np.random.default_rng(0)
    print(f"{'dtw_path_average':<22} {'pure ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for n in (10, 25, 50, 100, 200):
        mats = [rng.random((n, n)) for _ in range(20)]
        args = [(m,) for m in mats]
        pure = time_call(_dp_py.dtw_path_average, args, repeats) * 1e3
        if compiled is None:
            print(f"{n:>4} x {n:<15} {pure:>10.2f} {'-':>12} {'-':>8}")
            continue
        for m in mats[:3]:
            assert compiled.dtw_path_average(m) == _dp_py.dtw_path_average(m)
        fast = time_call(compiled.dtw_path_average, args, repeats) * 1e3
        print(f"{n:>4} x {n:<15} {pure:>10.2f} {fast:>12.2f} {pure / fast:>7.1f}x")


def bench_levenshtein(repeats):
    rng = np.random.default_rng(1)
    print()
    print(f"{'levenshtein_ints':<22} {'pure ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for n in (10, 50, 200, 1000):
        pairs = [
            (rng.integers(0, 8, size=n), rng.integers(0, 8, size=n))
            for _ in range(20)
        ]
        pure = time_call(_dp_py.levenshtein_ints, pairs, repeats) * 1e3
        if compiled is None:
            print(f"{n:>4} x {n:<15} {pure:>10.2f} {'-':>12} {'-':>8}")
            continue
        for a, b in pairs[:3]:
            assert compiled.levenshtein_ints(a, b) == _dp_py.levenshtein_ints(a, b)
        fast = time_call(compiled.levenshtein_ints, pairs, repeats) * 1e3
        print(f"{n:>4} x {n:<15} {pure:>10.2f} {fast:>12.2f} {pure / fast:>7.1f}x")


def bench_end_to_end():
    from zrseval.abx import evaluate_abx
    from zrseval.distance import DTW_COSINE
    from zrseval.synth import SynthConfig, generate_corpus

    config = SynthConfig(n_phones=6, n_speakers=5, n_items_per_cell=6,
                         class_separation=0.0, noise_sigma=1.0, seed=0)
    corpus = generate_corpus(config)
    t0 = time.perf_counter()
    result = evaluate_abx(corpus.manifest, corpus.embeddings, DTW_COSINE, threads=4)
    elapsed = time.perf_counter() - t0
    print()
    print(f"full evaluation ({BACKEND} backend): {result.triples_scored} triples "
          f"in {elapsed:.2f}s, error {result.global_error_rate:.4f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions, best-of (default 5)")
    args = parser.parse_args()
    print(f"selected kernel backend: {BACKEND}"
          + ("" if compiled else " (compiled extension not built)"))
    print()
    bench_dtw(args.repeats)
    bench_levenshtein(args.repeats)
    bench_end_to_end()


if __name__ == "__main__":
    main()

"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines; stated runtime bounds are enforced with time assertions.
"""

import filecmp
import io
import math
import time
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from zrseval.abx import (
    AbxCell,
    Triphone,
    aggregate,
    build_abx_task,
    evaluate_abx,
    score_cell,
    score_cells,
)
from zrseval.bitrate import bitrate, build_symbol_inventory, entropy
from zrseval.cli import main as cli_main
from zrseval.distance import (
    DTW_COSINE,
    DTW_KL,
    LEVENSHTEIN,
    FrameMetric,
    dtw_distance,
    frame_divergence_matrix,
    levenshtein,
    sequence_distance_fn,
)
from zrseval.formats import EmbeddingSequence
from zrseval.humaneval import (
    SystemScore,
    bootstrap_ci,
    character_error_rate,
    correlation_report,
    pearson_r,
)
from zrseval.synth import SynthConfig, collapse_runs, generate_corpus, gold_onehot_encoding

COSINE = FrameMetric("cosine")


def report(number, ok, description):
    print(f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'} {description}")
    assert ok, f"criterion {number} failed: {description}"


def seq(rows, item_id="x"):
    frames = np.asarray(rows, dtype=np.float64)
    symbols = tuple(" ".join(repr(float(v)) for v in row) for row in frames)
    return EmbeddingSequence(item_id=item_id, frames=frames, symbols=symbols)


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli_main(list(argv))
    return code, out.getvalue(), err.getvalue()


def test_criterion_01_gold_anchor_exact():
    t0 = time.monotonic()
    config = SynthConfig(n_phones=5, n_speakers=3, n_items_per_cell=2,
                         noise_sigma=0.0, speaker_shift=0.0, seed=0)
    corpus = generate_corpus(config)
    gold = gold_onehot_encoding(corpus)
    worst = 0.0
    for dist in (DTW_COSINE, DTW_KL, LEVENSHTEIN):
        result = evaluate_abx(corpus.manifest, gold, dist)
        worst = max(worst, result.global_error_rate)
    elapsed = time.monotonic() - t0
    ok = worst == 0.0 and elapsed < 10.0
    report(1, ok, f"gold one-hot ABX error exactly 0 for all three distances "
                  f"(worst={worst}, {elapsed:.1f}s < 10s)")


def test_criterion_02_chance_anchor():
    t0 = time.monotonic()
    config = SynthConfig(n_phones=6, n_speakers=5, n_items_per_cell=6,
                         class_separation=0.0, noise_sigma=1.0, seed=0)
    corpus = generate_corpus(config)
    result = evaluate_abx(corpus.manifest, corpus.embeddings, DTW_COSINE, threads=4)
    elapsed = time.monotonic() - t0
    deviation = abs(result.global_error_rate - 0.5)
    ok = result.triples_scored >= 20000 and deviation < 0.02 and elapsed < 60.0
    report(2, ok, f"chance-level ABX error {result.global_error_rate:.4f} within "
                  f"0.50 +/- 0.02 on {result.triples_scored} triples "
                  f"({elapsed:.1f}s < 60s)")


def test_criterion_03_bitrate_exactness():
    def inventory(symbols):
        frames = np.arange(len(symbols), dtype=np.float64)[:, None]
        return build_symbol_inventory(
            [EmbeddingSequence("x", frames, tuple(symbols))]
        )

    abab = bitrate(inventory(["a", "b", "a", "b"]), 2.0)
    hand_ok = abs(abab.bitrate_bits_per_s - 2.0) <= 1e-9 * 2.0
    degenerate = entropy(inventory(["k"] * 17))
    uniform = entropy(inventory(list("abcdefgh")))
    bounds_ok = degenerate == 0.0 and uniform == math.log2(8)
    ok = hand_ok and bounds_ok
    report(3, ok, f"bitrate hand case 2.0 bits/s exact to 1e-9 "
                  f"(got {abab.bitrate_bits_per_s!r}); entropy bounds attained "
                  f"({degenerate}, {uniform})")


def test_criterion_04_framewise_vs_textual_contrast():
    t0 = time.monotonic()
    config = SynthConfig(n_phones=5, n_speakers=3, n_items_per_cell=30,
                         frame_shift_s=0.005, phone_duration_frames=(5, 15), seed=0)
    corpus = generate_corpus(config)
    gold = gold_onehot_encoding(corpus)
    ids = corpus.manifest.ids()
    duration = corpus.manifest.total_duration_s()
    framewise = bitrate(build_symbol_inventory([gold[i] for i in ids]), duration)
    collapsed_seqs = {i: collapse_runs(gold[i]) for i in ids}
    collapsed = bitrate(
        build_symbol_inventory([collapsed_seqs[i] for i in ids]), duration
    )
    ratio = framewise.bitrate_bits_per_s / collapsed.bitrate_bits_per_s
    elapsed = time.monotonic() - t0
    ok = 5.0 <= ratio <= 10.0 and elapsed < 10.0
    report(4, ok, f"framewise/collapsed bitrate ratio {ratio:.3f} in [5, 10] "
                  f"({framewise.bitrate_bits_per_s:.0f} vs "
                  f"{collapsed.bitrate_bits_per_s:.0f} bits/s, {elapsed:.1f}s < 10s)")


def _dtw_oracle(dist):
    d = dist.tolist()
    n, m = len(d), len(d[0])
    best = None

    def better(total, steps):
        nonlocal best
        if best is None or total < best[0]:
            best = (total, steps)
        elif total == best[0]:
            for new, old in zip(reversed(steps), reversed(best[1])):
                if new != old:
                    if new < old:
                        best = (total, steps)
                    break

    def walk(i, j, acc, steps):
        if i == n - 1 and j == m - 1:
            better(acc, steps)
            return
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc + d[i + 1][j + 1], steps + (0,))
        if i + 1 < n:
            walk(i + 1, j, acc + d[i + 1][j], steps + (1,))
        if j + 1 < m:
            walk(i, j + 1, acc + d[i][j + 1], steps + (2,))

    walk(0, 0, d[0][0], ())
    total, steps = best
    return total / (len(steps) + 1)


def _lev_oracle(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            rec(i - 1, j) + 1,
            rec(i, j - 1) + 1,
            rec(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return rec(len(a), len(b))


def test_criterion_05_dp_kernel_oracles():
    rng = np.random.default_rng(0)
    dtw_pairs = 0
    for k in range(220):
        na, nb = rng.integers(1, 7, size=2)
        if k % 2:  # tie-rich discrete alphabet exercises tie handling
            alphabet = np.eye(3)
            a = seq(alphabet[rng.integers(0, 3, size=na)], "a")
            b = seq(alphabet[rng.integers(0, 3, size=nb)], "b")
        else:
            a = seq(rng.normal(size=(na, 3)), "a")
            b = seq(rng.normal(size=(nb, 3)), "b")
        expected = _dtw_oracle(frame_divergence_matrix(a, b, COSINE))
        assert dtw_distance(a, b, COSINE) == expected
        dtw_pairs += 1

    lev_pairs = 0
    for _ in range(520):
        a = "".join(rng.choice(list("abc"), size=rng.integers(0, 9)))
        b = "".join(rng.choice(list("abc"), size=rng.integers(0, 9)))
        assert levenshtein(a, b) == _lev_oracle(a, b)
        lev_pairs += 1
    report(5, True, f"DTW == path enumeration on {dtw_pairs} pairs (exact, "
                    f"tie-handling included); Levenshtein == recursive oracle "
                    f"on {lev_pairs} pairs (exact)")


def test_criterion_06_abx_brute_force_equivalence():
    rng = np.random.default_rng(1)
    fn = sequence_distance_fn(DTW_COSINE)
    checked = 0
    for _ in range(50):
        sizes = rng.integers(1, 4, size=3)
        items = {}
        for prefix, count in zip(("a", "b", "x"), sizes):
            for k in range(count):
                item_id = f"{prefix}{k}"
                items[item_id] = seq(rng.normal(size=(rng.integers(1, 6), 3)), item_id)
        cell = AbxCell(
            t1=Triphone("l", "p", "r"),
            t2=Triphone("l", "q", "r"),
            speaker_ab="s1",
            speaker_x="s2",
            a_items=tuple(f"a{k}" for k in range(sizes[0])),
            b_items=tuple(f"b{k}" for k in range(sizes[1])),
            x_items=tuple(f"x{k}" for k in range(sizes[2])),
        )
        halves = 0
        n = 0
        for a in cell.a_items:
            for b in cell.b_items:
                for x in cell.x_items:
                    dax = fn(items[a], items[x])
                    dbx = fn(items[b], items[x])
                    if dax < dbx:
                        halves += 2
                    elif dax == dbx:
                        halves += 1
                    n += 1
        assert score_cell(cell, items, DTW_COSINE) == Fraction(halves, 2 * n)
        checked += 1
    report(6, True, f"score_cell == naive triple recount on {checked} random "
                    f"cells (exact)")


def test_criterion_07_monotone_transform_invariance():
    config = SynthConfig(n_phones=4, n_speakers=3, n_items_per_cell=3,
                         class_separation=0.6, speaker_shift=0.3,
                         noise_sigma=0.5, seed=2)
    corpus = generate_corpus(config)
    cells = build_abx_task(corpus.manifest)
    base_fn = sequence_distance_fn(DTW_COSINE)
    base, _ = score_cells(cells, corpus.embeddings, DTW_COSINE)
    squared, _ = score_cells(
        cells, corpus.embeddings, DTW_COSINE,
        pair_distance=lambda a, b: base_fn(a, b) ** 2,
    )
    error_base = aggregate(base).global_error_rate
    error_squared = aggregate(squared).global_error_rate
    ok = error_base == error_squared and 0.0 < error_base < 0.5
    report(7, ok, f"global ABX error invariant under d -> d^2 (exact: "
                  f"{error_base} == {error_squared})")


def test_criterion_08_bootstrap_coverage():
    t0 = time.monotonic()
    rng = np.random.default_rng(2024)
    n_datasets = 1000
    covered = 0
    for k in range(n_datasets):
        data = rng.integers(0, 2, size=100).astype(np.float64)
        low, high = bootstrap_ci(data, n_resamples=10000, seed=k)
        covered += low <= 0.5 <= high
    coverage = covered / n_datasets
    repeat = bootstrap_ci([0.2, 0.4, 0.9, 0.1], seed=77)
    deterministic = repeat == bootstrap_ci([0.2, 0.4, 0.9, 0.1], seed=77)
    elapsed = time.monotonic() - t0
    ok = 0.92 <= coverage <= 0.98 and deterministic and elapsed < 60.0
    report(8, ok, f"bootstrap 95% CI covers the true mean in {coverage:.1%} of "
                  f"{n_datasets} datasets (within 95% +/- 3%); identical seeds "
                  f"identical intervals ({elapsed:.1f}s < 60s)")


def test_criterion_09_cer_and_statistics_hand_cases():
    cer_ok = character_error_rate("beg", "bag") == pytest.approx(1 / 3, abs=1e-12)
    xs = [0.5, 1.5, 2.0, 4.0]
    up = pearson_r(xs, [3.0 * x + 0.25 for x in xs])
    down = pearson_r(xs, [-2.0 * x + 7.0 for x in xs])
    pearson_ok = abs(up - 1.0) <= 1e-9 and abs(down + 1.0) <= 1e-9

    def score(system_id, cer, mos, sim):
        return SystemScore(system_id, cer, mos, sim, None,
                           (0.01, 0.01, 0.01), (5, 5, 5))

    scores = [
        score("gold", 0.0, 5.0, 4.9),
        score("s1", 0.2, 4.1, 2.0),
        score("s2", 0.35, 3.2, 2.6),
        score("s3", 0.6, 2.0, 2.2),
    ]
    corr = correlation_report(scores, {}, {}, gold_system_id="gold")
    included = corr.pairs[("similarity", "cer", True)]
    excluded = corr.pairs[("similarity", "cer", False)]
    corr_ok = included is not None and excluded is not None
    ok = cer_ok and pearson_ok and corr_ok
    report(9, ok, f"CER('beg','bag') = 1/3; pearson affine = +/-1 within 1e-9 "
                  f"({up!r}, {down!r}); correlation report carries gold-included "
                  f"({included:.3f}) and gold-excluded ({excluded:.3f}) values")


def test_criterion_10_determinism_under_parallelism(tmp_path):
    corpus_args = ["--n-phones", "4", "--n-speakers", "3", "--items-per-cell", "2",
                   "--noise-sigma", "0.3", "--seed", "5"]
    dirs = {}
    for threads in ("1", "8"):
        out_dir = tmp_path / f"t{threads}"
        code, stdout, _ = run_cli("synth", "--out", str(out_dir), *corpus_args,
                                  "--threads", threads)
        assert code == 0
        dirs[threads] = (out_dir, stdout)
    assert dirs["1"][1] == dirs["8"][1]
    base = dirs["1"][0]
    for rel in ("manifest.tsv", "transcripts.tsv", "judgments.csv",
                "systems/sub/t00000.txt", "systems/gold/t00010.txt"):
        assert filecmp.cmp(base / rel, dirs["8"][0] / rel, shallow=False)

    manifest = str(base / "manifest.tsv")
    sub = str(base / "systems" / "sub")
    abx_table = {t: str(tmp_path / f"pairs{t}.tsv") for t in ("1", "8")}
    commands = {
        "validate": lambda t: ("validate", "--manifest", manifest,
                               "--submission", sub),
        "bitrate": lambda t: ("bitrate", "--manifest", manifest,
                              "--submission", sub),
        "abx": lambda t: ("abx", "--manifest", manifest, "--submission", sub,
                          "--per-pair", abx_table[t], "--threads", t),
        "cer": lambda t: ("cer", "--judgments", str(base / "judgments.csv"),
                          "--transcripts", str(base / "transcripts.tsv"),
                          "--resamples", "500", "--threads", t),
        "report": lambda t: ("report", "--judgments", str(base / "judgments.csv"),
                             "--transcripts", str(base / "transcripts.tsv"),
                             "--resamples", "500", "--threads", t),
    }
    mismatched = []
    for name, argv in commands.items():
        outputs = {}
        for threads in ("1", "8"):
            code, stdout, _ = run_cli(*argv(threads))
            assert code == 0, name
            outputs[threads] = stdout
        if outputs["1"] != outputs["8"]:
            mismatched.append(name)
    if not mismatched:
        assert filecmp.cmp(abx_table["1"], abx_table["8"], shallow=False)
    ok = not mismatched
    report(10, ok, f"all CLI reports byte-identical between --threads 1 and "
                   f"--threads 8 ({', '.join(commands)})"
                   + (f"; MISMATCH: {mismatched}" if mismatched else ""))


def test_criterion_11_end_to_end_pipeline(tmp_path):
    t0 = time.monotonic()
    out = tmp_path / "corpus"
    code, _, _ = run_cli(
        "synth", "--out", str(out), "--n-phones", "4", "--n-speakers", "3",
        "--items-per-cell", "3", "--noise-sigma", "0.25", "--seed", "3",
    )
    assert code == 0
    manifest = str(out / "manifest.tsv")

    systems = ("gold", "collapsed", "sub")
    abx_lines = ["system_id\tabx_error"]
    bitrate_lines = ["system_id\tbitrate_bits_per_s"]
    for system in systems:
        submission = str(out / "systems" / system)
        code, _, _ = run_cli("validate", "--manifest", manifest,
                             "--submission", submission)
        assert code == 0, f"validate {system}"
        code, stdout, _ = run_cli("bitrate", "--manifest", manifest,
                                  "--submission", submission)
        assert code == 0
        bitrate_lines.append(f"{system}\t{stdout.split(chr(9))[4].strip()}")
        code, stdout, _ = run_cli("abx", "--manifest", manifest,
                                  "--submission", submission, "--threads", "4")
        assert code == 0
        abx_lines.append(f"{system}\t{stdout.strip()}")
    (tmp_path / "abx.tsv").write_text("\n".join(abx_lines) + "\n")
    (tmp_path / "bitrate.tsv").write_text("\n".join(bitrate_lines) + "\n")

    code, stdout, _ = run_cli(
        "cer", "--judgments", str(out / "judgments.csv"),
        "--transcripts", str(out / "transcripts.tsv"), "--resamples", "2000",
    )
    assert code == 0

    corr = tmp_path / "correlations.tsv"
    code, leaderboard, _ = run_cli(
        "report", "--judgments", str(out / "judgments.csv"),
        "--transcripts", str(out / "transcripts.tsv"),
        "--abx", str(tmp_path / "abx.tsv"),
        "--bitrate", str(tmp_path / "bitrate.tsv"),
        "--gold-system", "gold", "--correlations", str(corr),
        "--resamples", "2000",
    )
    assert code == 0
    elapsed = time.monotonic() - t0

    lines = leaderboard.strip().split("\n")
    rows = [ln.split("\t") for ln in lines[1:]]
    populated = all("-" not in row for row in rows)
    ok = populated and len(rows) == len(systems) and elapsed < 180.0 \
        and corr.is_file()
    report(11, ok, f"synth -> validate -> bitrate -> abx -> cer/report in "
                   f"{elapsed:.1f}s < 180s; leaderboard has {len(rows)} systems "
                   f"with every column populated")

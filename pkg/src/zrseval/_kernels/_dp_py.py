"""Pure-Python dynamic-programming kernels.

Fallback used when the compiled extension (``_dp``) is unavailable.  The
operation order is kept identical to the compiled version so both backends
return bit-identical results: Python floats and C doubles are the same
IEEE-754 type, and float addition/comparison is deterministic given the
same evaluation order.
"""

from __future__ import annotations


def dtw_path_average(dist) -> tuple[float, int]:
    """Accumulate the DTW cost matrix and return (total cost, path length).

    ``dist`` is an (n, m) matrix of nonnegative frame divergences.  Steps
    are (1,0), (0,1) and (1,1); each step pays the divergence of the newly
    aligned cell, the first aligned pair pays dist[0][0].  Among equal-cost
    predecessors the diagonal wins, then the (1,0) step (advancing the
    first sequence), then (0,1).  The returned length counts aligned pairs
    on the selected path, so total/length is the path-averaged divergence.
    """
    rows = dist.tolist() if hasattr(dist, "tolist") else [list(r) for r in dist]
    n = len(rows)
    m = len(rows[0])

    prev_acc = [0.0] * m
    prev_len = [0] * m
    for i in range(n):
        d = rows[i]
        cur_acc = [0.0] * m
        cur_len = [0] * m
        for j in range(m):
            if i == 0 and j == 0:
                acc = d[0]
                length = 1
            elif i == 0:
                acc = cur_acc[j - 1] + d[j]
                length = cur_len[j - 1] + 1
            elif j == 0:
                acc = prev_acc[0] + d[0]
                length = prev_len[0] + 1
            else:
                diag = prev_acc[j - 1]
                up = prev_acc[j]
                left = cur_acc[j - 1]
                if diag <= up and diag <= left:
                    acc = diag + d[j]
                    length = prev_len[j - 1] + 1
                elif up <= left:
                    acc = up + d[j]
                    length = prev_len[j] + 1
                else:
                    acc = left + d[j]
                    length = cur_len[j - 1] + 1
            cur_acc[j] = acc
            cur_len[j] = length
        prev_acc = cur_acc
        prev_len = cur_len
    return prev_acc[m - 1], prev_len[m - 1]


def levenshtein_ints(a, b) -> int:
    """Edit distance (unit-cost insert/delete/substitute) on int sequences."""
    a = list(a)
    b = list(b)
    n = len(a)
    m = len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        ai = a[i - 1]
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ai == b[j - 1] else 1)
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            if sub <= dele and sub <= ins:
                cur[j] = sub
            elif dele <= ins:
                cur[j] = dele
            else:
                cur[j] = ins
        prev = cur
    return prev[m]

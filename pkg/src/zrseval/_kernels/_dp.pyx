# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamic-programming kernels (DTW path average, Levenshtein).

Semantics mirror ``_dp_py`` exactly, including tie-breaking and operation
order, so both backends are bit-identical.
"""

import numpy as np


def dtw_path_average(dist):
    """Accumulate the DTW cost matrix; return (total cost, path length)."""
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t m = d.shape[1]

    acc_buf = np.empty((2, m), dtype=np.float64)
    len_buf = np.empty((2, m), dtype=np.int64)
    cdef double[:, ::1] acc = acc_buf
    cdef long long[:, ::1] plen = len_buf

    cdef Py_ssize_t i, j, prev_row, cur_row
    cdef double a, diag, up, left
    cdef long long length

    prev_row = 0
    cur_row = 1
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                a = d[0, 0]
                length = 1
            elif i == 0:
                a = acc[cur_row, j - 1] + d[0, j]
                length = plen[cur_row, j - 1] + 1
            elif j == 0:
                a = acc[prev_row, 0] + d[i, 0]
                length = plen[prev_row, 0] + 1
            else:
                diag = acc[prev_row, j - 1]
                up = acc[prev_row, j]
                left = acc[cur_row, j - 1]
                if diag <= up and diag <= left:
                    a = diag + d[i, j]
                    length = plen[prev_row, j - 1] + 1
                elif up <= left:
                    a = up + d[i, j]
                    length = plen[prev_row, j] + 1
                else:
                    a = left + d[i, j]
                    length = plen[cur_row, j - 1] + 1
            acc[cur_row, j] = a
            plen[cur_row, j] = length
        prev_row, cur_row = cur_row, prev_row
    return float(acc_buf[prev_row, m - 1]), int(len_buf[prev_row, m - 1])


def levenshtein_ints(a, b):
    """Edit distance (unit-cost insert/delete/substitute) on int sequences."""
    cdef long long[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef long long[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t n = av.shape[0]
    cdef Py_ssize_t m = bv.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n

    row_buf = np.empty((2, m + 1), dtype=np.int64)
    cdef long long[:, ::1] rows = row_buf
    cdef Py_ssize_t i, j, prev_row, cur_row
    cdef long long sub, dele, ins, ai

    for j in range(m + 1):
        rows[0, j] = j
    prev_row = 0
    cur_row = 1
    for i in range(1, n + 1):
        ai = av[i - 1]
        rows[cur_row, 0] = i
        for j in range(1, m + 1):
            sub = rows[prev_row, j - 1] + (0 if ai == bv[j - 1] else 1)
            dele = rows[prev_row, j] + 1
            ins = rows[cur_row, j - 1] + 1
            if sub <= dele and sub <= ins:
                rows[cur_row, j] = sub
            elif dele <= ins:
                rows[cur_row, j] = dele
            else:
                rows[cur_row, j] = ins
        prev_row, cur_row = cur_row, prev_row
    return int(row_buf[prev_row, m])

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: token-level Levenshtein and exact split scanning.

Both functions mirror ``_kernels_py`` operation-for-operation so that the
two backends agree bit-for-bit.
"""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def levenshtein(const long long[::1] a, const long long[::1] b):
    """Unit-cost edit distance between two integer-coded sequences."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef const long long[::1] tmp
    if n < m:
        tmp = a
        a = b
        b = tmp
        n, m = m, n
    if m == 0:
        return n

    cdef long long *row = <long long *> malloc((m + 1) * sizeof(long long))
    if row == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef long long diag, up, best, cost, ai
    try:
        for j in range(m + 1):
            row[j] = j
        for i in range(1, n + 1):
            diag = row[0]
            row[0] = i
            ai = a[i - 1]
            for j in range(1, m + 1):
                up = row[j]
                cost = 0 if ai == b[j - 1] else 1
                best = up + 1
                if row[j - 1] + 1 < best:
                    best = row[j - 1] + 1
                if diag + cost < best:
                    best = diag + cost
                row[j] = best
                diag = up
        return row[m]
    finally:
        free(row)


def best_split_sorted(const double[::1] xs, const double[::1] g, const double[::1] h,
                      double g_total, double h_total, double lam, double gamma,
                      Py_ssize_t min_leaf):
    """Scan one presorted feature column for the highest-gain threshold.

    Returns ``(gain, threshold, n_left)``; gain is ``-inf`` when no
    admissible cut exists.
    """
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i, best_i = -1
    cdef double gl = 0.0, hl = 0.0, gr, hr, gain
    cdef double best = -np.inf
    cdef double parent = g_total * g_total / (h_total + lam)
    cdef double thr
    for i in range(n - 1):
        gl = gl + g[i]
        hl = hl + h[i]
        if xs[i] == xs[i + 1]:
            continue
        if i + 1 < min_leaf or n - (i + 1) < min_leaf:
            continue
        gr = g_total - gl
        hr = h_total - hl
        gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent) - gamma
        if gain > best:
            best = gain
            best_i = i
    if best_i < 0:
        return best, np.nan, 0
    thr = 0.5 * (xs[best_i] + xs[best_i + 1])
    if thr <= xs[best_i]:
        thr = xs[best_i + 1]
    return best, thr, best_i + 1

"""Pure-Python/numpy twins of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def levenshtein(a, b):
    """Unit-cost edit distance between two sequences of hashable items."""
    a = a.tolist() if hasattr(a, "tolist") else list(a)
    b = b.tolist() if hasattr(b, "tolist") else list(b)
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    row = list(range(len(b) + 1))
    for i, ai in enumerate(a, start=1):
        diag = row[0]
        row[0] = i
        for j, bj in enumerate(b, start=1):
            up = row[j]
            best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            cost = 0 if ai == bj else 1
            if diag + cost < best:
                best = diag + cost
            row[j] = best
            diag = up
    return row[-1]


def best_split_sorted(xs, g, h, g_total, h_total, lam, gamma, min_leaf):
    n = xs.shape[0]
    if n < 2:
        return -np.inf, np.nan, 0
    gl = np.cumsum(g)[:-1]
    hl = np.cumsum(h)[:-1]
    left_counts = np.arange(1, n)
    ok = (xs[:-1] != xs[1:]) & (left_counts >= min_leaf) & (n - left_counts >= min_leaf)
    if not ok.any():
        return -np.inf, np.nan, 0
    gr = g_total - gl
    hr = h_total - hl
    parent = g_total * g_total / (h_total + lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent) - gamma
    gain = np.where(ok & ~np.isnan(gain), gain, -np.inf)
    i = int(np.argmax(gain))
    if gain[i] == -np.inf:
        return -np.inf, np.nan, 0
    thr = 0.5 * (xs[i] + xs[i + 1])
    if thr <= xs[i]:
        thr = xs[i + 1]
    return float(gain[i]), float(thr), i + 1

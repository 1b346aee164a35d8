"""Independent numpy evaluator for the scaffold families.

Written from the family definitions rather than from the library code:
row consistency is a count of boundary cells, valid occurrences come from
prefix sums, and subword-freeness is computed from the first occurrence end
to the right of each start instead of from maximal free segments.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def period(i, k):
    return 2 ** i * k ** (2 ** i)


def types(X, H):
    top = max(X, H)
    return range(1, max(1, int(top - 1).bit_length()) + 1)


class Window:
    def __init__(self, rows, content, boundary="#"):
        self.A = np.array([list(r) for r in rows], dtype=object)
        self.H, self.X = self.A.shape
        self.B = self.A == boundary
        self.C = np.isin(self.A, list(content))
        self.k = max(1, len(content))
        self.cs = np.concatenate([np.zeros((self.H, 1), dtype=int), np.cumsum(self.C, axis=1)], axis=1)

    def occ(self, i):
        """occ[y, x]: a valid type-i block starts at (x, y)."""
        n = 2 ** i
        if n >= self.X:
            return np.zeros((self.H, 0), dtype=bool)
        xs = np.arange(self.X - n)
        inner = self.cs[:, xs + n] - self.cs[:, xs + 1] == n - 1
        return self.B[:, xs] & self.B[:, xs + n] & inner


def grid(w, i):
    n = 2 ** i + 1
    if n > w.X or n > w.H:
        return False
    seg = sliding_window_view(w.B, n, axis=1)  # H x (X-n+1) x n
    cnt = seg.sum(axis=2)
    ends = seg[..., 0] & seg[..., -1]
    interior_single = (cnt == 1) & ~seg[..., 0] & ~seg[..., -1]
    consistent = interior_single | ((cnt == 2) & ends)
    column_bad = sliding_window_view(~consistent, n, axis=0).all(axis=2)
    return bool(column_bad.any())


def fixtype(w, i):
    n = 2 ** i
    occ = w.occ(i)
    xs = np.arange(w.X)
    for y, x0 in zip(*np.nonzero(occ)):
        if not np.array_equal(w.B[y], (xs - x0) % n == 0):
            return True
    return False


def periodicity(w, i):
    P = period(i, w.k)
    if w.X <= P:
        return False
    occ = w.occ(i)
    for y in range(w.H):
        if occ[y].any() and (w.A[y, :-P] != w.A[y, P:]).any():
            return True
    return False


def recurrence(w, i):
    n = 2 ** i
    occ = w.occ(i)
    for y, x0 in zip(*np.nonzero(occ)):
        if y + n < w.H and (w.A[y, x0:x0 + n + 1] != w.A[y + n, x0:x0 + n + 1]).any():
            return True
    return False


def _free_window_exists(row, s, x1, span, need):
    X, L = len(row), len(s)
    starts = [p for p in range(X - L + 1) if tuple(row[p:p + L]) == s]
    first_end = np.full(X + 1, X, dtype=int)
    for p in starts:
        first_end[p] = p + L - 1
    first_end = np.minimum.accumulate(first_end[::-1])[::-1]
    for a in range(x1 + 1):
        b = min(first_end[a] - 1, X - 1)
        if b >= x1 + span and b - a + 1 >= need:
            return True
    return False


def subword(w, i):
    if i < 2:
        return False
    span = 2 ** (i - 1)
    L = span - 1
    need = period(i - 1, w.k) + span - 2
    if w.X < need:
        return False
    hi = w.occ(i)
    lo = w.occ(i - 1)
    lows = [(y1, x1) for y1, x1 in zip(*np.nonzero(lo))]
    seen = set()
    for y, x0 in zip(*np.nonzero(hi)):
        for j in range(span + 1):
            s = tuple(w.A[y, x0 + 1 + j:x0 + 1 + j + L])
            if s in seen:
                continue
            seen.add(s)
            for y1, x1 in lows:
                if _free_window_exists(list(w.A[y1]), s, x1, span, need):
                    return True
    return False


FAMILIES = {
    "Grid": grid,
    "FixType": fixtype,
    "Periodicity": periodicity,
    "Recurrence": recurrence,
    "SubwordClosed": subword,
}


def reference_tags(rows, content, boundary="#"):
    w = Window(rows, content, boundary)
    out = set()
    for name, fn in FAMILIES.items():
        if any(fn(w, i) for i in types(w.X, w.H)):
            out.add(name)
    return out

"""Pure-Python/numpy kernels for the exact simplex; same API as ``_kernels``."""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def price(row0, colptr, rowidx, vals, basic, sign):
    """First non-basic column ``j`` with ``sign * row0 . a_j < 0``, else -1."""
    if len(colptr) < 2:
        return -1
    d = np.add.reduceat(row0[rowidx] * vals, colptr[:-1])
    hit = np.flatnonzero((d * sign < 0) & (basic == 0))
    return int(hit[0]) if len(hit) else -1


def price_dantzig(row0, colptr, rowidx, vals, basic, sign):
    """Non-basic column with the most negative ``sign * row0 . a_j`` (lowest
    index on ties), else -1."""
    if len(colptr) < 2:
        return -1
    d = np.add.reduceat(row0[rowidx] * vals, colptr[:-1]) * sign
    d[basic != 0] = 0
    j = int(np.argmin(d))
    return j if d[j] < 0 else -1


def pivot_i64(T, r, alpha, D):
    """Fraction-free update of every row except ``r``; exact division by ``D``."""
    ar = alpha[r]
    rowr = T[r].copy()
    T *= ar
    T -= np.outer(alpha, rowr)
    T //= D
    T[r] = rowr


def pivot_obj(T, r, alpha, D):
    ar = alpha[r]
    rowr = T[r].copy()
    for i in range(T.shape[0]):
        if i == r:
            continue
        ai = alpha[i]
        if ai:
            T[i] = (T[i] * ar - rowr * ai) // D
        else:
            T[i] = (T[i] * ar) // D

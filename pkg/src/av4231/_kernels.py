"""Compiled mirrors of the lock-sequence arithmetic for large automata.

These kernels repeat the pure-Python rules of :mod:`av4231.lockmodel` on
``int64`` arrays so that A_k can be built, or applied without being built,
at the sizes where a Python loop per transition is too slow.  The test
suite checks them against the reference implementation for every state up
to k = 7.

Letter codes: 0 = f, 1 = l, 2 = r, 3 = m.
"""

from __future__ import annotations

import warnings

import numpy as np
from numba import njit, prange

# numba falls back to another threading layer; the notice is noise on stderr
warnings.filterwarnings("ignore", message="The TBB threading layer")

from .lockmodel import count_states, schroder


def tables(k: int):
    """Schröder numbers, lexicographic offset table and length offsets for ``k``."""
    size = max(k, 2) + 1
    S = np.array([schroder(i) for i in range(size)], dtype=np.int64)
    # below[span, v]: interiors whose entry at this position is < v, per unit of "rest"
    below = np.zeros((size, size + 1), dtype=np.int64)
    for span in range(1, size):
        acc = 0
        for v in range(1, span + 1):
            acc += schroder(span - 1) if v == 1 else schroder(v - 2) * schroder(span - v + 1)
            below[span, v] = acc
    # 0-based index of the first state of each length
    first = np.zeros(size + 1, dtype=np.int64)
    for m in range(2, size + 1):
        first[m] = count_states(m - 1)
    return S, below, first


@njit(cache=True)
def rank0(s, m, S, below, first):
    """0-based rank of the lock sequence ``s[:m]``."""
    if m == 1:
        return np.int64(0)
    n = m - 2
    # ends[0] is the outermost open lock; innermost at ends[depth - 1]
    ends = np.empty(n + 1, dtype=np.int64)
    depth = 0
    total = np.int64(0)
    for p in range(1, n + 1):
        while depth > 0 and ends[depth - 1] < p:
            depth -= 1
        bound = ends[depth - 1] if depth > 0 else n
        span = bound - p + 1
        v = s[p]
        if v > 0:
            rest = np.int64(1)
            for d in range(depth):
                outer = ends[d - 1] if d > 0 else n
                rest *= S[outer - ends[d]]
            total += below[span, v] * rest
            ends[depth] = p + v - 1
            depth += 1
    return first[m] + total


@njit(cache=True)
def unrank0(i, k, S, below, first, out):
    """Write the state of 0-based rank ``i`` into ``out``; return its length."""
    m = 1
    while m < k and first[m + 1] <= i:
        m += 1
    out[0] = 0
    if m == 1:
        return 1
    out[m - 1] = 0
    n = m - 2
    index = i - first[m]
    ends = np.empty(n + 1, dtype=np.int64)
    depth = 0
    for p in range(1, n + 1):
        while depth > 0 and ends[depth - 1] < p:
            depth -= 1
        bound = ends[depth - 1] if depth > 0 else n
        span = bound - p + 1
        rest = np.int64(1)
        for d in range(depth):
            outer = ends[d - 1] if d > 0 else n
            rest *= S[outer - ends[d]]
        v = 0
        while v < span and below[span, v + 1] * rest <= index:
            v += 1
        index -= below[span, v] * rest
        out[p] = v
        if v > 0:
            ends[depth] = p + v - 1
            depth += 1
    return m


@njit(cache=True)
def step_into(s, m, kind, j, out):
    """Apply letter (kind, 1-based slot j) to ``s[:m]``; return the new length."""
    if kind == 0:
        for t in range(j - 1):
            out[t] = s[t]
        for t in range(j, m):
            out[t - 1] = s[t]
        new_m = m - 1
    elif kind == 3:
        for t in range(j):
            out[t] = s[t]
        out[j] = 0
        for t in range(j, m):
            out[t + 1] = s[t]
        new_m = m + 1
    else:
        for t in range(m):
            out[t] = s[t]
        new_m = m
    start = j if kind <= 1 else j + 1
    has_left = kind >= 2 or j >= 2
    if has_left and start <= new_m - 1:
        out[start - 1] = new_m - start
    if kind == 0:
        out[0] = 0
    return new_m


@njit(cache=True)
def row_targets(s, m, k, S, below, first, free, t, targets):
    """Fill ``targets`` with the 0-based target of every allowed letter, in
    canonical letter order.  Returns the number of letters."""
    for a in range(m):
        free[a] = True
    for a in range(m):
        for b in range(a, a + s[a]):
            free[b] = False
    count = 0
    for kind in range(4):
        if kind == 3 and m >= k:
            break
        for j in range(1, m + 1):
            if not free[j - 1]:
                continue
            if (kind == 0 or kind == 2) and j == m:
                continue
            new_m = step_into(s, m, kind, j, t)
            targets[count] = rank0(t, new_m, S, below, first)
            count += 1
    return count


@njit(cache=True)
def build_rows(lo, hi, k, S, below, first, counts, cols, mults):
    """Sparse rows ``lo..hi-1``: ascending distinct columns with multiplicities
    go to line ``row - lo`` of ``cols`` and ``mults``."""
    width = cols.shape[1]
    s = np.zeros(k + 1, dtype=np.int64)
    t = np.zeros(k + 2, dtype=np.int64)
    free = np.zeros(k + 1, dtype=np.bool_)
    targets = np.zeros(width, dtype=np.int64)
    for row in range(lo, hi):
        m = unrank0(row, k, S, below, first, s)
        c = row_targets(s, m, k, S, below, first, free, t, targets)
        order = np.sort(targets[:c])
        r = row - lo
        nnz = 0
        for a in range(c):
            if nnz > 0 and cols[r, nnz - 1] == order[a]:
                mults[r, nnz - 1] += 1
            else:
                cols[r, nnz] = order[a]
                mults[r, nnz] = 1
                nnz += 1
        counts[r] = nnz


@njit(cache=True)
def out_degrees(k, S, below, first, degrees):
    s = np.zeros(k + 1, dtype=np.int64)
    t = np.zeros(k + 2, dtype=np.int64)
    free = np.zeros(k + 1, dtype=np.bool_)
    targets = np.zeros(4 * k + 2, dtype=np.int64)
    for row in range(degrees.shape[0]):
        m = unrank0(row, k, S, below, first, s)
        degrees[row] = row_targets(s, m, k, S, below, first, free, t, targets)


@njit(parallel=True, cache=True)
def csr_matvec(indptr, indices, data, x, y):
    """y = A x; each row is summed by one worker in stored order."""
    for row in prange(indptr.shape[0] - 1):
        acc = 0.0
        for e in range(indptr[row], indptr[row + 1]):
            acc += data[e] * x[indices[e]]
        y[row] = acc


@njit(parallel=True, cache=True)
def csr_matvec_mod(indptr, indices, data, x, y, p):
    """y = A x mod p for int64 residues ``x < p < 2**31``."""
    for row in prange(indptr.shape[0] - 1):
        acc = np.int64(0)
        for e in range(indptr[row], indptr[row + 1]):
            acc += np.int64(data[e]) * x[indices[e]]
        y[row] = acc % p


@njit(parallel=True, cache=True)
def csr_matvec_int(indptr, indices, data, x, y):
    """Exact int64 y = A x; the caller proves the sums cannot overflow."""
    for row in prange(indptr.shape[0] - 1):
        acc = np.int64(0)
        for e in range(indptr[row], indptr[row + 1]):
            acc += np.int64(data[e]) * x[indices[e]]
        y[row] = acc


@njit(parallel=True, cache=True)
def free_matvec(k, S, below, first, x, y):
    """y = A_k x without storing A_k: each row regenerates its transitions."""
    n = x.shape[0]
    for row in prange(n):
        s = np.zeros(k + 1, dtype=np.int64)
        t = np.zeros(k + 2, dtype=np.int64)
        free = np.zeros(k + 1, dtype=np.bool_)
        targets = np.zeros(4 * k + 2, dtype=np.int64)
        m = unrank0(row, k, S, below, first, s)
        c = row_targets(s, m, k, S, below, first, free, t, targets)
        order = np.sort(targets[:c])
        acc = 0.0
        for a in range(c):
            acc += x[order[a]]
        y[row] = acc


@njit(parallel=True, cache=True)
def free_matvec_mod(k, S, below, first, x, y, p):
    n = x.shape[0]
    for row in prange(n):
        s = np.zeros(k + 1, dtype=np.int64)
        t = np.zeros(k + 2, dtype=np.int64)
        free = np.zeros(k + 1, dtype=np.bool_)
        targets = np.zeros(4 * k + 2, dtype=np.int64)
        m = unrank0(row, k, S, below, first, s)
        c = row_targets(s, m, k, S, below, first, free, t, targets)
        acc = np.int64(0)
        for a in range(c):
            acc += x[targets[a]]
        y[row] = acc % p


@njit(parallel=True, cache=True)
def free_matvec_int(k, S, below, first, x, y):
    n = x.shape[0]
    for row in prange(n):
        s = np.zeros(k + 1, dtype=np.int64)
        t = np.zeros(k + 2, dtype=np.int64)
        free = np.zeros(k + 1, dtype=np.bool_)
        targets = np.zeros(4 * k + 2, dtype=np.int64)
        m = unrank0(row, k, S, below, first, s)
        c = row_targets(s, m, k, S, below, first, free, t, targets)
        acc = np.int64(0)
        for a in range(c):
            acc += x[targets[a]]
        y[row] = acc

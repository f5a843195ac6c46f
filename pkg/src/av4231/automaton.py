"""The automata Aut_k and their transfer matrices A_k.

Rows and columns of A_k are indexed by state rank (1-based in every public
interface, 0-based inside arrays).  Entry (i, j) counts the letters taking
state i to state j.  The matrix is kept in compressed sparse row form with
``int64`` row offsets, ``int32`` columns and ``uint8`` multiplicities.
"""

from __future__ import annotations

import io
import json
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import ResourceLimit, ValidationError
from .lockmodel import (allowed_letters, count_states, format_lock_sequence, is_allowed,
                        rank, step, unrank)
from .permcore import Letter

log = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 8 * 2**30
_CHUNK_ROWS = 1 << 16


@dataclass(frozen=True)
class TransitionMatrix:
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def nnz(self) -> int:
        return int(self.indptr[-1])

    def row(self, i: int) -> dict[int, int]:
        """Row ``i`` (1-based) as ``{column: multiplicity}`` with 1-based columns."""
        lo, hi = self.indptr[i - 1], self.indptr[i]
        return {int(c) + 1: int(w) for c, w in zip(self.indices[lo:hi], self.data[lo:hi])}

    def row_sums(self) -> np.ndarray:
        return np.add.reduceat(self.data.astype(np.int64), self.indptr[:-1]) \
            if self.nnz else np.zeros(self.n, dtype=np.int64)

    def diagonal(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        hit = rows == self.indices
        out[rows[hit]] = self.data[hit]
        return out

    def to_dense(self) -> np.ndarray:
        if self.n > 5000:
            raise ResourceLimit(f"dense form of a {self.n}x{self.n} matrix refused")
        out = np.zeros((self.n, self.n), dtype=np.int64)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def restrict(self, k: int) -> "TransitionMatrix":
        """Leading principal submatrix on the states of length at most ``k``."""
        size = count_states(k)
        rows = []
        for i in range(size):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            keep = self.indices[lo:hi] < size
            rows.append((self.indices[lo:hi][keep], self.data[lo:hi][keep]))
        indptr = np.zeros(size + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(c) for c, _ in rows])
        indices = np.concatenate([c for c, _ in rows]) if rows else np.zeros(0, np.int32)
        data = np.concatenate([w for _, w in rows]) if rows else np.zeros(0, np.uint8)
        return TransitionMatrix(k, indptr, indices, data)

    def export_text(self, out=None) -> str | None:
        """Write ``"N E k"`` then one ``"i j w"`` line per entry, 1-based, row-major."""
        buf = io.StringIO() if out is None else out
        buf.write(f"{self.n} {self.nnz} {self.k}\n")
        rows = np.repeat(np.arange(1, self.n + 1), np.diff(self.indptr))
        block = 1 << 20
        for lo in range(0, self.nnz, block):
            hi = min(lo + block, self.nnz)
            table = np.column_stack((rows[lo:hi], self.indices[lo:hi].astype(np.int64) + 1,
                                     self.data[lo:hi].astype(np.int64)))
            np.savetxt(buf, table, fmt="%d")
        if out is None:
            return buf.getvalue()
        return None

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return (self.k == other.k and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.data, other.data))


def estimate_bytes(k: int) -> int:
    """Upper estimate of the CSR size of A_k, using 4k - 2 entries per row."""
    n = count_states(k)
    return 8 * (n + 1) + n * (4 * k - 2) * (4 + 1)


def check_k(k: int) -> int:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if k > 16:
        raise ResourceLimit(f"k={k} is beyond the supported range (states exceed 2**31)")
    return int(k)


def transitions(s: Sequence[int], k: int) -> list[tuple[Letter, tuple[int, ...]]]:
    """Letter-level transitions out of state ``s`` in canonical letter order."""
    return [(a, step(s, a, k)) for a in allowed_letters(s, k)]


def iter_row(i: int, k: int) -> Counter:
    """Matrix-free row generator: ``{column: multiplicity}`` for 1-based row ``i``."""
    s = unrank(i, k)
    return Counter(rank(t) for _, t in transitions(s, k))


def build_reference(k: int) -> TransitionMatrix:
    """Pure-Python construction of A_k; slow, used as a cross-check."""
    k = check_k(k)
    n = count_states(k)
    indptr = [0]
    cols: list[int] = []
    mults: list[int] = []
    for i in range(1, n + 1):
        row = iter_row(i, k)
        for c in sorted(row):
            cols.append(c - 1)
            mults.append(row[c])
        indptr.append(len(cols))
    return TransitionMatrix(k, np.array(indptr, dtype=np.int64),
                            np.array(cols, dtype=np.int32), np.array(mults, dtype=np.uint8))


def build(k: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> TransitionMatrix:
    """Materialize A_k, refusing when the size estimate exceeds ``memory_budget`` bytes."""
    k = check_k(k)
    need = estimate_bytes(k)
    if need > memory_budget:
        raise ResourceLimit(f"A_{k} needs about {need} bytes, budget is {memory_budget}")
    n = count_states(k)
    S, below, first = _kernels.tables(k)
    width = 4 * k + 2
    counts = np.zeros(_CHUNK_ROWS, dtype=np.int64)
    cols = np.zeros((_CHUNK_ROWS, width), dtype=np.int32)
    mults = np.zeros((_CHUNK_ROWS, width), dtype=np.uint8)
    indptr = np.zeros(n + 1, dtype=np.int64)
    col_parts, mult_parts = [], []
    for lo in range(0, n, _CHUNK_ROWS):
        hi = min(lo + _CHUNK_ROWS, n)
        _kernels.build_rows(lo, hi, k, S, below, first, counts, cols, mults)
        c = counts[:hi - lo]
        mask = np.arange(width) < c[:, None]
        col_parts.append(cols[:hi - lo][mask])
        mult_parts.append(mults[:hi - lo][mask])
        indptr[lo + 1:hi + 1] = indptr[lo] + np.cumsum(c)
        if lo and (lo // _CHUNK_ROWS) % 16 == 0:
            log.info("built %d of %d rows of A_%d", hi, n, k)
    indices = np.concatenate(col_parts)
    data = np.concatenate(mult_parts)
    return TransitionMatrix(k, indptr, indices, data)


def out_degrees(k: int) -> np.ndarray:
    """Number of allowed letters for every state, in rank order."""
    k = check_k(k)
    S, below, first = _kernels.tables(k)
    degrees = np.zeros(count_states(k), dtype=np.int64)
    _kernels.out_degrees(k, S, below, first, degrees)
    return degrees


@dataclass(frozen=True)
class Stats:
    k: int
    states: int
    transitions: int
    max_out_degree: int
    argmax_state: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "states": self.states, "transitions": self.transitions,
                           "maxOutDegree": self.max_out_degree,
                           "argmaxState": format_lock_sequence(self.argmax_state)})


def stats(k: int) -> Stats:
    """State count, letter-transition count and the (first) state of largest out-degree.

    The rank order puts shorter states first, so the first maximizer in rank
    order is the least state under (length, lex) order.
    """
    degrees = out_degrees(k)
    best = int(np.argmax(degrees))
    return Stats(k, len(degrees), int(degrees.sum()), int(degrees[best]), unrank(best + 1))


def run(word: Sequence[Letter], k: int) -> Iterator[tuple[int, ...]]:
    """Yield the successive states visited by ``word``; stops at a disallowed letter."""
    s: tuple[int, ...] = (0,)
    yield s
    for a in word:
        if not is_allowed(s, a, k):
            return
        s = step(s, a, k)
        yield s


def accepts(word: Sequence[Letter], k: int) -> bool:
    k = check_k(k)
    visited = list(run(word, k))
    return len(visited) == len(word) + 1 and visited[-1] == (0,)

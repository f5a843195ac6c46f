"""Transfer-matrix computations on A_k.

* exact word counts (A_k^n)_{1,1}, using multi-modular integer arithmetic
  with a proven magnitude bound and Chinese remaindering;
* power iteration with Collatz-Wielandt brackets;
* exact certification of ``A_k v >= c v`` in integer arithmetic;
* the eigenvalue table over k and the ``a + b / sqrt(k)`` extrapolation.

Every routine accepts either a prebuilt :class:`TransitionMatrix` or runs
matrix-free, regenerating each row of A_k from the lock-sequence rules on
every product.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .automaton import DEFAULT_MEMORY_BUDGET, TransitionMatrix, build, check_k, estimate_bytes
from .errors import (DimensionMismatch, InsufficientData, NonNegativityViolation, NotConverged,
                     ResourceLimit, ValidationError, ZeroStart)
from .lockmodel import count_states

log = logging.getLogger(__name__)

CERT_SCALE_BITS = 40
_INT64_LIMIT = 2**62


class Operator:
    """y = A_k x, from stored CSR arrays or regenerated row by row."""

    def __init__(self, k: int, matrix: TransitionMatrix | None = None, mode: str = "auto",
                 memory_budget: int = DEFAULT_MEMORY_BUDGET):
        self.k = check_k(k)
        if mode not in ("auto", "csr", "matrix-free"):
            raise ValidationError(f"unknown mode {mode!r}")
        if matrix is not None:
            if matrix.k != self.k:
                raise DimensionMismatch(f"matrix is A_{matrix.k}, expected A_{self.k}")
            mode = "csr"
        elif mode == "auto":
            mode = "csr" if estimate_bytes(self.k) <= memory_budget else "matrix-free"
        if mode == "csr" and matrix is None:
            matrix = build(self.k, memory_budget)
        self.mode = mode
        self.matrix = matrix
        self.n = count_states(self.k)
        if mode == "csr":
            self.max_row_sum = int(matrix.row_sums().max())
        else:
            self.max_row_sum = 4 * self.k - 2
        self._tables = _kernels.tables(self.k)

    def matvec(self, x: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        y = np.empty(self.n, dtype=np.float64) if out is None else out
        if self.matrix is not None:
            m = self.matrix
            _kernels.csr_matvec(m.indptr, m.indices, m.data, x, y)
        else:
            _kernels.free_matvec(self.k, *self._tables, x, y)
        return y

    def matvec_mod(self, x: np.ndarray, p: int) -> np.ndarray:
        y = np.empty(self.n, dtype=np.int64)
        if self.matrix is not None:
            m = self.matrix
            _kernels.csr_matvec_mod(m.indptr, m.indices, m.data, x, y, p)
        else:
            _kernels.free_matvec_mod(self.k, *self._tables, x, y, p)
        return y

    def matvec_exact(self, w: Sequence[int]) -> list[int]:
        """Exact A w for non-negative integers, in int64 when no sum can overflow."""
        top = max(w) if len(w) else 0
        if top * self.max_row_sum < _INT64_LIMIT:
            x = np.asarray(w, dtype=np.int64)
            y = np.empty(self.n, dtype=np.int64)
            if self.matrix is not None:
                m = self.matrix
                _kernels.csr_matvec_int(m.indptr, m.indices, m.data, x, y)
            else:
                _kernels.free_matvec_int(self.k, *self._tables, x, y)
            return [int(v) for v in y]
        return self._matvec_big(w)

    def _matvec_big(self, w: Sequence[int]) -> list[int]:
        from .automaton import iter_row
        if self.matrix is not None:
            m = self.matrix
            out = []
            for i in range(self.n):
                lo, hi = m.indptr[i], m.indptr[i + 1]
                out.append(sum(int(c) * w[j] for j, c in zip(m.indices[lo:hi], m.data[lo:hi])))
            return out
        return [sum(mult * w[j - 1] for j, mult in iter_row(i + 1, self.k).items())
                for i in range(self.n)]


def _primes_below(limit: int, count: int) -> list[int]:
    out = []
    c = limit - 1
    while len(out) < count:
        if c % 2 and all(c % d for d in range(3, math.isqrt(c) + 1, 2)):
            out.append(c)
        c -= 1
    return out


def _crt(residues: Sequence[int], primes: Sequence[int]) -> int:
    x, mod = 0, 1
    for r, p in zip(residues, primes):
        t = ((r - x) * pow(mod, -1, p)) % p
        x += mod * t
        mod *= p
    return x


@dataclass
class CountSequence:
    k: int
    counts: list[int]
    mode: str = "csr"

    def restricted(self, n: int) -> bool:
        """True when (A_k^n)_{1,1} may undercount s_n(4231), i.e. n > 2k - 1."""
        return n > 2 * self.k - 1

    def to_csv(self) -> str:
        lines = ["n,count,restricted"]
        lines += [f"{n},{c},{int(self.restricted(n))}" for n, c in enumerate(self.counts)]
        return "\n".join(lines) + "\n"


def count_words(k: int, n_max: int, matrix: TransitionMatrix | None = None,
                mode: str = "auto", memory_budget: int = DEFAULT_MEMORY_BUDGET,
                op: Operator | None = None) -> CountSequence:
    """Exact (A_k^n)_{1,1} for n = 0..n_max.

    Entries of A_k^n e_1 are at most (max row sum)^n, so working modulo
    enough 31-bit primes and recombining gives the exact integers.
    """
    if n_max < 0:
        raise ValidationError("n_max must be non-negative")
    op = op or Operator(k, matrix, mode, memory_budget)
    if n_max > 2 * op.k - 1:
        warnings.warn(f"counts with n > {2 * op.k - 1} are restricted to {op.k}-slot evolutions",
                      stacklevel=2)
    bound = max(op.max_row_sum, 1) ** n_max
    primes = []
    product = 1
    for p in _primes_below(2**31, 64):
        primes.append(p)
        product *= p
        if product > bound:
            break
    vectors = []
    for _ in primes:
        x = np.zeros(op.n, dtype=np.int64)
        x[0] = 1
        vectors.append(x)
    counts = [1]
    for _ in range(n_max):
        vectors = [op.matvec_mod(x, p) for x, p in zip(vectors, primes)]
        counts.append(_crt([int(x[0]) for x in vectors], primes))
    return CountSequence(op.k, counts, op.mode)


def count_words_bigint(k: int, n_max: int, matrix: TransitionMatrix | None = None) -> list[int]:
    """Same counts using Python integers throughout; for small k only."""
    A = matrix if matrix is not None else build(k)
    x = [0] * A.n
    x[0] = 1
    out = [1]
    for _ in range(n_max):
        y = []
        for i in range(A.n):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            y.append(sum(int(w) * x[j] for j, w in zip(A.indices[lo:hi], A.data[lo:hi])))
        x = y
        out.append(x[0])
    return out


@dataclass
class EigenEstimate:
    k: int
    estimate: float
    lower: float
    upper: float
    iterations: int
    vector: np.ndarray = field(repr=False)
    mode: str = "csr"
    converged: bool = True

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "lambda": self.estimate, "lower": self.lower,
                           "upper": self.upper, "iterations": self.iterations,
                           "mode": self.mode})


def power_iteration(k: int, tol: float = 1e-6, max_iter: int = 100_000,
                    matrix: TransitionMatrix | None = None, mode: str = "auto",
                    memory_budget: int = DEFAULT_MEMORY_BUDGET, op: Operator | None = None,
                    progress: Callable[[int, float, float], None] | None = None,
                    progress_every: int = 25) -> EigenEstimate:
    """Dominant eigenvalue of A_k with a Collatz-Wielandt bracket.

    Starts from the all-ones vector and renormalizes to max-norm 1.  For the
    current iterate ``x > 0`` the bracket is the min and max of
    ``(A x)_i / x_i``; iteration stops once its width is at most ``tol``.
    Raises :class:`NotConverged` carrying the last estimate otherwise.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    if max_iter < 1:
        raise ValidationError("max_iter must be positive")
    op = op or Operator(k, matrix, mode, memory_budget)
    x = np.ones(op.n)
    y = np.empty(op.n)
    for it in range(1, max_iter + 1):
        op.matvec(x, y)
        ratios = y / x
        lower, upper = float(ratios.min()), float(ratios.max())
        top = float(y.max())
        result = EigenEstimate(op.k, min(max(top, lower), upper), lower, upper, it, x,
                               op.mode, upper - lower <= tol)
        if result.converged:
            return result
        if progress and it % progress_every == 0:
            progress(it, lower, upper)
        x = y / top
    result.converged = False
    raise NotConverged(f"bracket [{lower}, {upper}] wider than {tol} after {max_iter} "
                       "iterations", result)


def parse_rational(text) -> Fraction:
    """Exact rational from ``"p/q"``, a decimal string or an int; floats are refused."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ValidationError("pass rationals as strings, not binary floats")
    try:
        value = Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {text!r}") from exc
    return value


@dataclass
class Certificate:
    k: int
    c: Fraction
    v: list[int]
    verified: bool
    violation: int | None = None
    requested: Fraction | None = None

    def to_json(self) -> str:
        return json.dumps({"k": self.k, "c": f"{self.c.numerator}/{self.c.denominator}",
                           "verified": self.verified,
                           "violation": self.violation,
                           "requested": None if self.requested is None else
                           f"{self.requested.numerator}/{self.requested.denominator}"})

    def export_text(self) -> str:
        """Header ``"k c_num c_den"`` then one integer entry of v per line."""
        lines = [f"{self.k} {self.c.numerator} {self.c.denominator}"]
        lines += [str(x) for x in self.v]
        return "\n".join(lines) + "\n"


def read_certificate_vector(text: str) -> tuple[int, Fraction, list[int]]:
    lines = text.split()
    if len(lines) < 3:
        raise ValidationError("certificate file needs a 'k c_num c_den' header")
    k, num, den = (int(t) for t in lines[:3])
    return k, Fraction(num, den), [int(t) for t in lines[3:]]


def _integer_vector(v: Sequence) -> list[int]:
    """Scale a non-negative rational vector to integers (same direction)."""
    fracs = [Fraction(x) for x in v]
    if any(f < 0 for f in fracs):
        bad = next(i for i, f in enumerate(fracs) if f < 0)
        raise NonNegativityViolation(f"v[{bad + 1}] = {fracs[bad]} is negative")
    scale = math.lcm(*(f.denominator for f in fracs)) if fracs else 1
    return [int(f * scale) for f in fracs]


def verify(op: Operator, c: Fraction, w: Sequence[int]) -> int | None:
    """Check ``A w >= c w`` exactly; return the first failing 1-based row or None."""
    if len(w) != op.n:
        raise DimensionMismatch(f"vector has {len(w)} entries, A_{op.k} has {op.n} rows")
    if any(x < 0 for x in w):
        bad = next(i for i, x in enumerate(w) if x < 0)
        raise NonNegativityViolation(f"v[{bad + 1}] = {w[bad]} is negative")
    if w[0] == 0:
        raise ZeroStart("v_1 must be positive")
    if c < 0:
        raise ValidationError("c must be non-negative")
    Aw = op.matvec_exact(w)
    num, den = c.numerator, c.denominator
    top = max(max(w), max(Aw))
    if top * max(num, den) < _INT64_LIMIT:
        lhs = den * np.asarray(Aw, dtype=np.int64)
        rhs = num * np.asarray(w, dtype=np.int64)
        bad = np.flatnonzero(lhs < rhs)
        return int(bad[0]) + 1 if len(bad) else None
    for i, (a, x) in enumerate(zip(Aw, w)):
        if den * a < num * x:
            return i + 1
    return None


def certificate_vector(estimate: EigenEstimate, bits: int = CERT_SCALE_BITS) -> list[int]:
    """Scale the float eigenvector by 2**bits and round every entry down."""
    scaled = np.floor(np.ldexp(estimate.vector, bits))
    return [int(x) for x in scaled.astype(np.int64)]


def certify_lower_bound(k: int, c, v: Sequence | None = None,
                        matrix: TransitionMatrix | None = None, mode: str = "auto",
                        memory_budget: int = DEFAULT_MEMORY_BUDGET, tol: float = 1e-9,
                        max_iter: int = 100_000, op: Operator | None = None) -> Certificate:
    """Exact check of ``A_k v >= c v`` for a non-negative ``v`` with ``v_1 > 0``.

    Without ``v``, the vector comes from power iteration (rounded down to
    integers after scaling).  If that vector fails, iteration is tightened
    once; if it still fails the certificate is retried at ``c`` minus the
    bracket width and ``requested`` records the original ``c``.
    """
    c = parse_rational(c)
    op = op or Operator(k, matrix, mode, memory_budget)
    if v is not None:
        w = _integer_vector(v)
        bad = verify(op, c, w)
        return Certificate(op.k, c, w, bad is None, bad)

    est = _estimate(op, tol, max_iter)
    w = certificate_vector(est)
    bad = verify(op, c, w)
    if bad is None:
        return Certificate(op.k, c, w, True)
    est = _estimate(op, tol / 1000, max_iter)
    w = certificate_vector(est)
    bad = verify(op, c, w)
    if bad is None:
        return Certificate(op.k, c, w, True)
    width = Fraction(est.upper - est.lower).limit_denominator(10**12)
    reduced = c - max(width, Fraction(1, 10**12))
    if reduced >= 0:
        bad_reduced = verify(op, reduced, w)
        if bad_reduced is None:
            return Certificate(op.k, reduced, w, True, requested=c)
    return Certificate(op.k, c, w, False, bad)


def _estimate(op: Operator, tol: float, max_iter: int) -> EigenEstimate:
    try:
        return power_iteration(op.k, tol, max_iter, op=op)
    except NotConverged as exc:
        return exc.estimate


@dataclass
class TableRow:
    k: int
    estimate: float | None
    lower: float | None
    upper: float | None
    iterations: int = 0
    error: str | None = None


def lambda_table(k_max: int, tol: float = 1e-6, max_iter: int = 100_000, mode: str = "auto",
                 memory_budget: int = DEFAULT_MEMORY_BUDGET,
                 progress: Callable[[int, float, float], None] | None = None) -> list[TableRow]:
    """Power iteration for k = 1..k_max; a failing k ends the table with its error noted."""
    if k_max < 1:
        raise ValidationError("k_max must be positive")
    rows = []
    for k in range(1, k_max + 1):
        try:
            est = power_iteration(k, tol, max_iter, mode=mode, memory_budget=memory_budget,
                                  progress=progress)
        except NotConverged as exc:
            e = exc.estimate
            rows.append(TableRow(k, e.estimate, e.lower, e.upper, e.iterations, "not converged"))
            continue
        except ResourceLimit as exc:
            rows.append(TableRow(k, None, None, None, 0, str(exc)))
            break
        rows.append(TableRow(k, est.estimate, est.lower, est.upper, est.iterations))
    return rows


def is_monotone(rows: Sequence[TableRow]) -> bool:
    """Estimates nondecreasing in k up to the bracket widths."""
    good = [r for r in rows if r.estimate is not None]
    return all(b.upper >= a.lower for a, b in zip(good, good[1:]))


@dataclass
class Extrapolation:
    intercept: float
    slope: float
    residuals: list[float]
    ks: list[int]


def extrapolate(table: Sequence[tuple[int, float]], k_min: int = 1) -> Extrapolation:
    """Least-squares fit of ``lambda_k ~ intercept + slope / sqrt(k)`` over k >= k_min.

    A heuristic guess at the limit of the sequence, not a bound of any kind.
    """
    pts = [(int(k), float(lam)) for k, lam in table if k >= k_min]
    if len(pts) < 3:
        raise InsufficientData(f"need at least 3 rows with k >= {k_min}, got {len(pts)}")
    ks = np.array([k for k, _ in pts], dtype=float)
    lam = np.array([v for _, v in pts])
    design = np.column_stack((np.ones_like(ks), ks ** -0.5))
    (a, b), *_ = np.linalg.lstsq(design, lam, rcond=None)
    residuals = lam - design @ np.array([a, b])
    return Extrapolation(float(a), float(b), residuals.tolist(), [k for k, _ in pts])


# Growth rates reported for k = 1..13, used by the extrapolation diagnostic.
PUBLISHED_LAMBDA = {
    1: 1.0000, 2: 3.4142, 3: 5.1120, 4: 6.2262, 5: 7.0014, 6: 7.5693, 7: 8.0029,
    8: 8.3450, 9: 8.6220, 10: 8.8511, 11: 9.0439, 12: 9.2085, 13: 9.3508,
}

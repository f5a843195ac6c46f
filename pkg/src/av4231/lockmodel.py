"""Lock sequences: the states of the 4231 automata.

A lock sequence ``s`` of length ``m`` describes a configuration with ``m``
slots.  ``s[j] > 0`` (1-based ``j``) locks the block of slots
``j .. j + s[j] - 1``; a locked slot admits no insertion at all until every
slot to the left of the lock has been filled.  Sequences are stored as
0-based tuples, while slot numbers in letters stay 1-based.

States are ordered first by length and then lexicographically; ``rank``
and ``unrank`` convert between a state and its 1-based position in that
order by counting with large Schröder numbers.
"""

from __future__ import annotations

import threading
from typing import Sequence

from .errors import DisallowedLetter, IndexOutOfRange, ResourceLimit, ValidationError
from .permcore import Letter

LockSequence = tuple

MAX_ENUMERATE_LENGTH = 16

_schroder_lock = threading.Lock()
_schroder_cache = [1, 2]


def schroder(i: int) -> int:
    """Large Schröder number S(i): 1, 2, 6, 22, 90, ..."""
    if i < 0:
        raise ValidationError("schroder index must be non-negative")
    if i >= len(_schroder_cache):
        with _schroder_lock:
            table = list(_schroder_cache)
            # (n + 1) S(n) = 3 (2n - 1) S(n - 1) - (n - 2) S(n - 2)
            while len(table) <= i:
                n = len(table)
                table.append((3 * (2 * n - 1) * table[n - 1] - (n - 2) * table[n - 2]) // (n + 1))
            _schroder_cache[len(_schroder_cache):] = table[len(_schroder_cache):]
    return _schroder_cache[i]


def count_states(k: int) -> int:
    """Number of lock sequences of length at most ``k``."""
    if k < 1:
        raise ValidationError("k must be positive")
    return 1 + sum(schroder(m - 2) for m in range(2, k + 1))


def is_lock_sequence(s: Sequence[int]) -> bool:
    m = len(s)
    if m < 1 or s[0] != 0 or s[-1] != 0:
        return False
    if any(not isinstance(v, int) or v < 0 for v in s):
        return False
    for a in range(m):
        end = a + s[a]
        # 1-based a + s_a <= m  <=>  0-based a + s[a] <= m - 1
        if end > m - 1:
            return False
        for b in range(a + 1, end):
            if b + s[b] > end:
                return False
    return True


def check_lock_sequence(s: Sequence[int]) -> tuple[int, ...]:
    s = tuple(s)
    if not is_lock_sequence(s):
        raise ValidationError(f"not a lock sequence: {format_lock_sequence(s)}")
    return s


def parse_lock_sequence(text: str) -> tuple[int, ...]:
    """Accept ``"0,2,1,0"`` or the compact digit string ``"0210"``."""
    text = text.strip()
    try:
        if "," in text or " " in text:
            values = [int(tok) for tok in text.replace(",", " ").split()]
        elif text.isdigit():
            values = [int(ch) for ch in text]
        else:
            raise ValueError(text)
    except ValueError as exc:
        raise ValidationError(f"bad lock sequence text {text!r}") from exc
    return check_lock_sequence(values)


def format_lock_sequence(s: Sequence[int]) -> str:
    return ",".join(str(v) for v in s)


def locked_slots(s: Sequence[int]) -> set[int]:
    """1-based indices of the slots covered by some lock."""
    out = set()
    for j, length in enumerate(s, start=1):
        out.update(range(j, j + length))
    return out


def allowed_letters(s: Sequence[int], slot_cap: int) -> list[Letter]:
    """Allowed letters in canonical order: all f, then l, r, m; slots ascending."""
    m = len(s)
    if m > slot_cap:
        raise ValidationError(f"state of length {m} exceeds slot cap {slot_cap}")
    free = sorted(set(range(1, m + 1)) - locked_slots(s))
    letters = [Letter("f", i) for i in free if i < m]
    letters += [Letter("l", i) for i in free]
    letters += [Letter("r", i) for i in free if i < m]
    if m < slot_cap:
        letters += [Letter("m", i) for i in free]
    return letters


def is_allowed(s: Sequence[int], letter: Letter, slot_cap: int | None = None) -> bool:
    m = len(s)
    j = letter.slot
    if not 1 <= j <= m or j in locked_slots(s):
        return False
    if letter.kind in "fr" and j == m:
        return False
    if letter.kind == "m" and slot_cap is not None and m >= slot_cap:
        return False
    return letter.kind in "flrm"


def step(s: Sequence[int], letter: Letter, slot_cap: int | None = None) -> tuple[int, ...]:
    """State reached from ``s`` by an allowed insertion ``letter``."""
    if not is_allowed(s, letter, slot_cap):
        raise DisallowedLetter(f"{letter} is not allowed in state {format_lock_sequence(s)}")
    kind, j = letter.kind, letter.slot
    locks = [v for v in s]
    m = len(locks)
    # reindex: slot j (unlocked, so s_j = 0) disappears or is split
    if kind == "f":
        del locks[j - 1]
        new_m = m - 1
    elif kind == "m":
        locks.insert(j, 0)
        new_m = m + 1
    else:
        new_m = m
    # new lock runs from the first slot right of the inserted value to the penultimate slot
    start = j if kind in "fl" else j + 1
    has_left_slot = kind in "rm" or j >= 2
    if has_left_slot and start <= new_m - 1:
        locks[start - 1] = new_m - start
    if kind == "f":
        locks[0] = 0
    return tuple(locks)


def _segment_product(ends: list[int], n: int) -> int:
    """Completions of the segments beyond the innermost enclosing lock."""
    out = 1
    for inner, outer in zip(ends, ends[1:] + [n]):
        out *= schroder(outer - inner)
    return out


def _lex_rank(inner: Sequence[int]) -> int:
    """0-based lexicographic rank of the interior ``s_2 .. s_{m-1}``."""
    n = len(inner)
    ends: list[int] = []  # 1-based ends of the open locks, innermost first
    total = 0
    for p, v in enumerate(inner, start=1):
        while ends and ends[0] < p:
            ends.pop(0)
        bound = ends[0] if ends else n
        span = bound - p + 1
        rest = _segment_product(ends, n) if ends else 1
        below = 0
        if v > 0:
            below = schroder(span - 1)
            below += sum(schroder(t - 1) * schroder(span - t) for t in range(1, v))
        total += below * rest
        if v > 0:
            ends.insert(0, p + v - 1)
    return total


def _lex_unrank(n: int, index: int) -> list[int]:
    ends: list[int] = []
    out = []
    for p in range(1, n + 1):
        while ends and ends[0] < p:
            ends.pop(0)
        bound = ends[0] if ends else n
        span = bound - p + 1
        rest = _segment_product(ends, n) if ends else 1
        block = schroder(span - 1) * rest
        if index < block:
            out.append(0)
            continue
        index -= block
        v = 1
        while True:
            block = schroder(v - 1) * schroder(span - v) * rest
            if index < block:
                break
            index -= block
            v += 1
        out.append(v)
        ends.insert(0, p + v - 1)
    return out


def rank(s: Sequence[int]) -> int:
    """1-based index of ``s`` in (length, lexicographic) order."""
    s = check_lock_sequence(s)
    m = len(s)
    if m == 1:
        return 1
    return count_states(m - 1) + 1 + _lex_rank(s[1:-1])


def unrank(i: int, slot_cap: int | None = None) -> tuple[int, ...]:
    if i < 1:
        raise IndexOutOfRange(f"state index must be positive, got {i}")
    if slot_cap is not None and i > count_states(slot_cap):
        raise IndexOutOfRange(f"state index {i} exceeds {count_states(slot_cap)} states for k={slot_cap}")
    if i == 1:
        return (0,)
    m = 2
    below = 1
    while below + schroder(m - 2) < i:
        below += schroder(m - 2)
        m += 1
    return (0, *_lex_unrank(m - 2, i - below - 1), 0)


def enumerate_states(m: int, max_length: int = MAX_ENUMERATE_LENGTH) -> list[tuple[int, ...]]:
    """All lock sequences of length exactly ``m`` in lexicographic order."""
    if m < 1:
        raise ValidationError("length must be positive")
    if m > max_length:
        raise ResourceLimit(f"refusing to enumerate {schroder(m - 2)} states of length {m}")
    if m == 1:
        return [(0,)]
    n = m - 2
    out = []

    def extend(prefix, ends):
        p = len(prefix) + 1
        if p > n:
            out.append((0, *prefix, 0))
            return
        ends = [e for e in ends if e >= p]
        bound = ends[0] if ends else n
        extend(prefix + [0], ends)
        for v in range(1, bound - p + 2):
            extend(prefix + [v], [p + v - 1] + ends)

    extend([], [])
    return out

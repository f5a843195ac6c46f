"""Permutations, 4231 containment and the modified insertion encoding.

Permutations are plain tuples of the values ``1..n``.  Insertion words are
tuples of :class:`Letter`.  In the modified encoding used throughout the
package the rightmost slot is never filled and never receives a right
insertion, so every configuration ends with a slot.
"""

from __future__ import annotations

import itertools
from typing import Iterator, NamedTuple, Sequence

from .errors import IncompleteEvolution, InvalidLetter, ResourceLimit, ValidationError

PATTERN_4231 = (4, 2, 3, 1)
KINDS = "flrm"
MAX_EXHAUSTIVE_N = 11

Permutation = tuple


class Letter(NamedTuple):
    """One insertion letter: ``kind`` is one of ``'f', 'l', 'r', 'm'``."""

    kind: str
    slot: int

    def __str__(self) -> str:
        return f"{self.kind}{self.slot}"


class _Slot:
    __slots__ = ()

    def __repr__(self) -> str:
        return "◊"


SLOT = _Slot()


def check_perm(values: Sequence[int]) -> tuple[int, ...]:
    p = tuple(int(v) for v in values)
    if sorted(p) != list(range(1, len(p) + 1)):
        raise ValidationError(f"not a permutation of 1..{len(p)}: {values!r}")
    return p


def parse_perm(text: str) -> tuple[int, ...]:
    """Parse ``"2 4 6 1 5 3"``; a blank string is the empty permutation."""
    try:
        values = [int(tok) for tok in text.split()]
    except ValueError as exc:
        raise ValidationError(f"bad permutation text {text!r}") from exc
    return check_perm(values)


def format_perm(p: Sequence[int]) -> str:
    return " ".join(str(v) for v in p)


def parse_letter(token: str) -> Letter:
    token = token.strip()
    kind, digits = token[:1].lower(), token[1:]
    if kind not in KINDS or not digits.isdigit() or int(digits) < 1:
        raise ValidationError(f"bad insertion letter {token!r}")
    return Letter(kind, int(digits))


def parse_word(text: str) -> tuple[Letter, ...]:
    """Parse ``"m1 l1 m2 l1 f2 f1"`` into a word."""
    return tuple(parse_letter(tok) for tok in text.split())


def format_word(word: Sequence[Letter]) -> str:
    return " ".join(str(a) for a in word)


def _same_order(a: Sequence[int], b: Sequence[int]) -> bool:
    return all((a[i] < a[j]) == (b[i] < b[j])
               for i in range(len(a)) for j in range(i + 1, len(a)))


def contains(host: Sequence[int], pattern: Sequence[int]) -> bool:
    """Exhaustive check over every subsequence of ``host`` of the pattern's length."""
    k = len(pattern)
    if k > len(host):
        return False
    return any(_same_order(sub, pattern) for sub in itertools.combinations(host, k))


def contains_4231_fast(p: Sequence[int]) -> bool:
    """O(n^2) scan: pick the middle pair ``b < c`` and look for a larger
    value before it and a smaller value after it."""
    n = len(p)
    if n < 4:
        return False
    prefix_max = [0] * n
    best = 0
    for i, v in enumerate(p):
        prefix_max[i] = best
        best = max(best, v)
    suffix_min = [n + 1] * n
    best = n + 1
    for i in range(n - 1, -1, -1):
        suffix_min[i] = best
        best = min(best, p[i])
    for j in range(1, n - 2):
        b = p[j]
        for k in range(j + 1, n - 1):
            c = p[k]
            if b < c and prefix_max[j] > c and suffix_min[k] < b:
                return True
    return False


def avoids_4231(p: Sequence[int]) -> bool:
    return not contains_4231_fast(p)


def _gaps(p: Sequence[int], placed: int) -> list[tuple[int, int]]:
    """Return the slots of the configuration holding values ``1..placed``.

    Each slot is the open interval ``(a, b)`` of final positions it will
    eventually fill.  The last slot is always present.
    """
    n = len(p)
    cuts = sorted(i for i, v in enumerate(p) if v <= placed)
    bounds = [-1] + cuts + [n]
    slots = [(a, b) for a, b in zip(bounds, bounds[1:]) if b - a > 1]
    if not slots or slots[-1][1] != n:
        slots.append((bounds[-2], n))
    return slots


def encode(p: Sequence[int]) -> tuple[Letter, ...]:
    """Insertion encoding of any permutation (not only avoiders)."""
    p = check_perm(p)
    n = len(p)
    where = {v: i for i, v in enumerate(p)}
    word = []
    for v in range(1, n + 1):
        pos = where[v]
        slots = _gaps(p, v - 1)
        for index, (a, b) in enumerate(slots, start=1):
            if a < pos < b:
                break
        last = index == len(slots)
        left = pos - a > 1
        right = last or b - pos > 1
        kind = "m" if left and right else "l" if right else "r" if left else "f"
        word.append(Letter(kind, index))
    return tuple(word)


def slots_required(p: Sequence[int]) -> int:
    """Largest number of slots present at any stage of the evolution of ``p``."""
    p = check_perm(p)
    return max(len(_gaps(p, v)) for v in range(len(p) + 1))


def apply_letter(items: list, letter: Letter, value: int) -> None:
    """Play ``letter`` on a configuration in place, inserting ``value``."""
    slots = [i for i, item in enumerate(items) if item is SLOT]
    if not 1 <= letter.slot <= len(slots):
        raise InvalidLetter(f"{letter}: no slot {letter.slot} among {len(slots)}")
    if letter.kind in "fr" and letter.slot == len(slots):
        raise InvalidLetter(f"{letter}: the rightmost slot admits neither f nor r")
    at = slots[letter.slot - 1]
    if letter.kind == "f":
        items[at] = value
    elif letter.kind == "l":
        items.insert(at, value)
    elif letter.kind == "r":
        items.insert(at + 1, value)
    else:
        items[at:at + 1] = [SLOT, value, SLOT]


def decode(word: Sequence[Letter]) -> tuple[int, ...]:
    items: list = [SLOT]
    for value, letter in enumerate(word, start=1):
        apply_letter(items, letter, value)
    if items.count(SLOT) != 1:
        raise IncompleteEvolution(
            f"evolution ends with {items.count(SLOT)} slots: {format_config(items)}")
    return tuple(items[:-1])


def format_config(items: Sequence) -> str:
    return " ".join("◊" if item is SLOT else str(item) for item in items)


def iter_avoiders(n: int, slot_cap: int | None = None,
                  max_n: int = MAX_EXHAUSTIVE_N) -> Iterator[tuple[int, ...]]:
    """Yield every 4231-avoider of length ``n``, optionally within ``slot_cap`` slots.

    Avoiders of length ``n`` are grown from avoiders of length ``n - 1`` by
    inserting the new maximum at every position; this visits a superset of
    Av(4231) of length ``n`` since the class is closed under deleting the
    maximum, and every candidate is checked in full.
    """
    if n < 0:
        raise ValidationError("n must be non-negative")
    if n > max_n:
        raise ResourceLimit(f"exhaustive enumeration refused for n={n} > {max_n}")

    def grow(p, size):
        if size == n:
            if slot_cap is None or slots_required(p) <= slot_cap:
                yield p
            return
        top = size + 1
        for i in range(size + 1):
            q = p[:i] + (top,) + p[i:]
            if avoids_4231(q):
                yield from grow(q, top)

    yield from grow((), 0)


def count_avoiders(n: int, slot_cap: int | None = None,
                   max_n: int = MAX_EXHAUSTIVE_N) -> int:
    return sum(1 for _ in iter_avoiders(n, slot_cap, max_n))

import itertools

import pytest
from hypothesis import given, strategies as st

from av4231.errors import DisallowedLetter, IndexOutOfRange, ResourceLimit, ValidationError
from av4231.lockmodel import (allowed_letters, count_states, enumerate_states, is_lock_sequence,
                              locked_slots, parse_lock_sequence, rank, schroder, step, unrank)
from av4231.permcore import Letter, parse_word

from conftest import AUT4_ORDER, AUT4_TABLE


def seq(text):
    return tuple(int(ch) for ch in text)


def letters(text):
    return set(parse_word(text))


def schroder_paths(n):
    """Count u/d/h paths (0,0) -> (2n,0) staying non-negative, by walking them."""
    total = 0

    def walk(x, y):
        nonlocal total
        if y < 0 or y > 2 * n - x:
            return
        if x == 2 * n:
            total += y == 0
            return
        walk(x + 1, y + 1)
        walk(x + 1, y - 1)
        if x + 2 <= 2 * n:
            walk(x + 2, y)

    walk(0, 0)
    return total


def test_schroder_against_path_walk():
    for n in range(8):
        assert schroder(n) == schroder_paths(n)
    assert [schroder(i) for i in range(4)] == [1, 2, 6, 22]


@pytest.mark.parametrize("k, expected", [(1, 1), (4, 10), (5, 32), (13, 6589728)])
def test_count_states(k, expected):
    assert count_states(k) == expected


@pytest.mark.parametrize("s, ok", [
    ((0,), True), ((0, 2, 1, 0), True), ((1, 0), False), ((0, 2, 0), False),
    ((0, 3, 1, 0, 0), True), ((0, 1, 2, 0, 0), True), ((0, 2, 2, 0, 0), False), ((), False), ((0, -1, 0), False),
])
def test_is_lock_sequence(s, ok):
    assert is_lock_sequence(s) is ok


def _by_definition(m):
    """Lock sequences of length m straight from the invariants."""
    out = []
    for s in itertools.product(range(m), repeat=m):
        if s[0] or s[-1]:
            continue
        ok = all(j + s[j] <= m - 1 for j in range(m))
        ok = ok and all(b + s[b] <= a + s[a] for a in range(m) for b in range(a + 1, a + s[a]))
        if ok:
            out.append(s)
    return out


def test_enumerate_states_matches_definition():
    for m in range(1, 8):
        assert enumerate_states(m) == _by_definition(m)


def test_enumerate_state_examples():
    assert enumerate_states(3) == [(0, 0, 0), (0, 1, 0)]
    assert [s for m in range(1, 5) for s in enumerate_states(m)] == [seq(t) for t in AUT4_ORDER]
    assert len(enumerate_states(6)) == 90
    for m in range(2, 11):
        assert len(enumerate_states(m)) == schroder(m - 2)
    with pytest.raises(ResourceLimit):
        enumerate_states(40)


def test_locked_slots():
    assert locked_slots((0, 0, 0)) == set()
    assert locked_slots((0, 2, 1, 0)) == {2, 3}
    assert locked_slots((0, 1, 0, 0)) == {2}


def test_allowed_letters_examples():
    assert set(allowed_letters((0, 1, 0), 4)) == letters("f1 l1 r1 m1 l3 m3")
    assert set(allowed_letters((0,), 1)) == letters("l1")
    assert set(allowed_letters((0, 0), 4)) == letters("f1 l1 r1 m1 l2 m2")


@pytest.mark.parametrize("s, letter, expected", [
    ("00", "f1", "0"), ("010", "m1", "0210"), ("0010", "r1", "0210"), ("0210", "f1", "010"),
    ("0010", "m4", "00100"), ("00100", "r1", "03100"),
])
def test_step_examples(s, letter, expected):
    assert step(seq(s), parse_word(letter)[0]) == seq(expected)


def test_step_reproduces_aut4_table():
    seen = 0
    for src, row in AUT4_TABLE.items():
        want = {a: seq(dst) for dst, word in row.items() for a in parse_word(word)}
        got = {a: step(seq(src), a, 4) for a in allowed_letters(seq(src), 4)}
        assert got == want, src
        seen += len(got)
    assert seen == 60


@pytest.mark.parametrize("s, letter", [
    ((0, 1, 0), Letter("f", 2)), ((0, 1, 0), Letter("l", 2)), ((0, 0), Letter("r", 2)),
    ((0, 0), Letter("f", 2)), ((0, 0), Letter("l", 3)), ((0,), Letter("m", 1)),
])
def test_step_rejects(s, letter):
    with pytest.raises(DisallowedLetter):
        step(s, letter, 1 if s == (0,) else 4)


def all_states(k):
    return [s for m in range(1, k + 1) for s in enumerate_states(m)]


@pytest.mark.parametrize("k", range(1, 7))
def test_closure_and_letter_rules(k):
    for s in all_states(k):
        m = len(s)
        allowed = allowed_letters(s, k)
        assert len(set(allowed)) == len(allowed)
        assert not {a.slot for a in allowed} & locked_slots(s)
        assert {a.kind for a in allowed if a.slot == m} <= {"l", "m"}
        for a in allowed:
            t = step(s, a, k)
            assert is_lock_sequence(t) and len(t) <= k
            assert len(t) - m == {"f": -1, "l": 0, "r": 0, "m": 1}[a.kind]


def test_every_state_reachable_up_to_6():
    k = 6
    seen = {(0,)}
    frontier = [(0,)]
    while frontier:
        s = frontier.pop()
        for a in allowed_letters(s, k):
            t = step(s, a, k)
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    assert seen == set(all_states(k))


def test_lock_free_out_degree():
    for k in range(1, 9):
        for m in range(1, k + 1):
            n = len(allowed_letters((0,) * m, k))
            assert n == (4 * m - 2 if m < k else 3 * m - 2)


def test_rank_order():
    assert rank((0,)) == 1
    assert [unrank(i) for i in range(1, 11)] == [seq(t) for t in AUT4_ORDER]
    assert unrank(10) == (0, 2, 1, 0)
    states = all_states(8)
    assert len(states) == count_states(8)
    for i, s in enumerate(states, start=1):
        assert rank(s) == i
        assert unrank(i) == s


def test_unrank_bounds():
    with pytest.raises(IndexOutOfRange):
        unrank(0)
    with pytest.raises(IndexOutOfRange):
        unrank(11, slot_cap=4)
    assert unrank(10, slot_cap=4) == (0, 2, 1, 0)


@given(st.integers(min_value=1, max_value=count_states(20)))
def test_rank_unrank_large(i):
    s = unrank(i)
    assert is_lock_sequence(s)
    assert rank(s) == i


@given(st.integers(min_value=1, max_value=count_states(16) - 1))
def test_rank_strictly_monotone(i):
    a, b = unrank(i), unrank(i + 1)
    assert (len(a), a) < (len(b), b)


def test_text_formats():
    assert parse_lock_sequence("0210") == (0, 2, 1, 0)
    assert parse_lock_sequence("0,2,1,0") == (0, 2, 1, 0)
    assert parse_lock_sequence("0,10,0,0,0,0,0,0,0,0,0,0") == (0, 10) + (0,) * 10
    for bad in ("1,0", "02x0", "", "0,2,0"):
        with pytest.raises(ValidationError):
            parse_lock_sequence(bad)

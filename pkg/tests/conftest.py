import functools
import warnings

import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")

from av4231.automaton import build  # noqa: E402

# Letter-level transition table of Aut_4: state -> {target: letters}.
AUT4_TABLE = {
    "0": {"0": "l1", "00": "m1"},
    "00": {"0": "f1", "00": "l1 l2 r1", "000": "m2", "010": "m1"},
    "000": {"00": "f1 f2", "000": "l1 l3 r2", "010": "r1 l2", "0000": "m3", "0010": "m2",
            "0200": "m1"},
    "010": {"00": "f1", "010": "l1 l3 r1", "0100": "m3", "0210": "m1"},
    "0000": {"000": "f1 f3", "010": "f2", "0000": "l1 l4 r3", "0010": "r2 l3", "0200": "r1 l2"},
    "0010": {"010": "f1 f2", "0010": "l1 l4 r2", "0210": "r1 l2"},
    "0100": {"000": "f1", "010": "f3", "0100": "l1 l4 r3", "0110": "l3", "0200": "r1"},
    "0110": {"010": "f1", "0110": "l1 l4", "0210": "r1"},
    "0200": {"000": "f1", "0200": "l1 l4 r1"},
    "0210": {"010": "f1", "0210": "l1 l4 r1"},
}
AUT4_ORDER = ["0", "00", "000", "010", "0000", "0010", "0100", "0110", "0200", "0210"]


@functools.lru_cache(maxsize=None)
def matrix(k):
    return build(k)


@pytest.fixture(scope="session")
def built():
    return matrix


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

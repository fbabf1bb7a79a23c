from __future__ import annotations

import pytest

from subhex.constructions import construct, flag_hexagon
from subhex.geometry import build_geometry

ORDINARY_LINES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]


@pytest.fixture(scope="session")
def ordinary():
    return build_geometry(6, ORDINARY_LINES, "ordinary hexagon")


@pytest.fixture(scope="session")
def grid():
    return build_geometry(9, [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8)], "grid")


@pytest.fixture(scope="session")
def h2():
    return construct("split_cayley", 2)


@pytest.fixture(scope="session")
def h2d():
    return construct("dual_split_cayley", 2)


@pytest.fixture(scope="session")
def h3():
    return construct("split_cayley", 3)


@pytest.fixture(scope="session")
def h4():
    return construct("split_cayley", 4)


@pytest.fixture(scope="session")
def h4d():
    return construct("dual_split_cayley", 4)


@pytest.fixture(scope="session")
def flag2():
    return flag_hexagon(2)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one acceptance line; printed now and again in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        _VERDICTS.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

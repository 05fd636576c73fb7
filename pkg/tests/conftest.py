import numpy as np
import pytest

from forge.tower import SizeSchedule, TowerLevel, Tower, build_tower


def cyclic_level(node, n, steps):
    """Block Z/n with generators x -> x + s."""
    x = np.arange(n)
    return TowerLevel.from_tables(node, [(x + s) % n for s in steps])


@pytest.fixture(scope="session")
def flat1():
    return build_tower(1, SizeSchedule("FLAT", n0=1), seed=1)


@pytest.fixture(scope="session")
def flat2():
    return build_tower(2, SizeSchedule("FLAT", n0=1), seed=1)


@pytest.fixture(scope="session")
def s5_level(flat1):
    """The 120-element block at node 0."""
    return flat1.level((0,))


@pytest.fixture
def z5():
    return cyclic_level((0,), 5, (1, 2))


@pytest.fixture
def toy_tower():
    """Hand-made depth-1 tower of cyclic blocks (no marker data)."""
    root = cyclic_level((), 3, (1,))
    a = cyclic_level((0,), 5, (1, 2))
    b = cyclic_level((1,), 7, (1, 3))
    a.base, b.base = 3, 8
    return Tower([root, a, b], 1, SizeSchedule("FLAT"), 0)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"CRITERION {key:>2} {'PASS' if ok else 'FAIL'}  {detail}")

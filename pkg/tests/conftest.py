import pytest

from gsbq.grid import make_grid
from gsbq.petviashvili import exact_profile


@pytest.fixture(scope="session")
def big_grid():
    return make_grid(200.0, 4096)


@pytest.fixture(scope="session")
def mid_grid():
    return make_grid(100.0, 2048)


@pytest.fixture(scope="session")
def exact_p2(big_grid):
    return exact_profile(2, 0.0, big_grid)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line: report(name, passed, detail)."""

    def _record(name, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

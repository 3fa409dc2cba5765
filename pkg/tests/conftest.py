import numpy as np
import pytest

from ergoham.grid import TimeGrid, TorusGrid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def grid1():
    return TorusGrid(1, 32), TimeGrid(1.0, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

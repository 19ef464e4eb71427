import numpy as np
import pytest

from fglap import build_grid, power, powersum

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str):
    """Keep a criterion line for the end-of-run summary (pytest captures stdout)."""
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(-1.0, 1.0, 64, 4.0)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(-1.0, 1.0, 16, 2.0)


@pytest.fixture(scope="session")
def quad():
    return power(2.0)


@pytest.fixture(scope="session")
def psum():
    return powersum([[1.0, 2.0], [1.0, 4.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def rel_err(a, b, floor=0.0):
    """Entrywise relative error with an absolute floor for tiny reference values."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.abs(a - b) / np.maximum(np.abs(b), floor)

import numpy as np
import pytest

from mwgi import CarrierSpec, Scene, build_square_array

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def _record(criterion, ok, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def carrier():
    return CarrierSpec()


@pytest.fixture
def small_setup():
    """A grid/array pair whose field matrix is well conditioned (cond ~ 1e2)."""
    grid = Scene.empty(6, 6, 0.1)
    geometry = build_square_array(16, 4.0, 1.0)
    return grid, geometry


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

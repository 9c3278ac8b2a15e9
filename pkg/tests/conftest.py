import math

import numpy as np
import pytest

from logfsk.waveform import LogFskParams


@pytest.fixture(scope="session")
def params256():
    return LogFskParams.design(256)


@pytest.fixture(scope="session")
def params64():
    return LogFskParams.design(64)


def brute_basis(m, n_samples, grid="integer"):
    """Pure-Python cosine for oracle checks."""
    out = []
    for n in range(n_samples):
        if grid == "integer":
            arg = math.pi * m * (2 * n + 1) / (2 * n_samples)
        else:
            arg = math.pi * (2 * m + 1) * n / (2 * n_samples)
        out.append(math.sqrt(2.0 / n_samples) * math.cos(arg))
    return np.array(out)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""

    def emit(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

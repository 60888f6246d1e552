import numpy as np
import pytest

from bagley_torvik.closed_form import InitialConditions
from bagley_torvik.roots import BTCoefficients, RootSystem

# the coefficients used throughout the numerical examples
CANONICAL = (1.3, 2.6, 3.4)


@pytest.fixture(scope="session")
def coeffs():
    return BTCoefficients(*CANONICAL)


@pytest.fixture(scope="session")
def rs(coeffs):
    return RootSystem.from_coefficients(coeffs)


@pytest.fixture
def unit_ics():
    return InitialConditions(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# ---------------------------------------------------------------- acceptance report


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(number, title, ok, detail)``."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        request.config._acceptance_lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from rebgk.core import make_grid, make_species

CASE1_MASSES = (2.0, 1.0, 3.0, 1.0)
CASE1_RATES = (3.0, 2.0, 1.0, 4.0)

# (criterion, passed, message) rows reported by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def species():
    return make_species(CASE1_MASSES, CASE1_RATES)


@pytest.fixture(scope="session")
def grid(species):
    return make_grid(-30.0, 30.0, 1201, species)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, msg in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {crit}: {msg}")

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hartree5.ground_state import solve_ground_state, solve_soliton_profile  # noqa: E402
from hartree5.spectral_radial import RadialGrid  # noqa: E402


@pytest.fixture(scope="session")
def grid():
    """Default desk-scale lattice."""
    return RadialGrid(4096, 40.0)


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid(1023, 20.0)


@pytest.fixture(scope="session")
def ground_state():
    return solve_ground_state()


@pytest.fixture(scope="session")
def soliton():
    return solve_soliton_profile()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for key in sorted(results):
            terminalreporter.write_line(results[key])

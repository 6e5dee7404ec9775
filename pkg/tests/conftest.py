import numpy as np
import pytest

from reslab.potential import make_double_well
from reslab.resonance import find_resonances, gamow_from_resonance


@pytest.fixture(scope="session")
def u234_well():
    return make_double_well(1.0, 2.0, 436.0)


@pytest.fixture(scope="session")
def u234_resonance(u234_well):
    return find_resonances(u234_well, (7.0, 8.0), 1e-3, digits=50)[0]


@pytest.fixture(scope="session")
def moderate_well():
    # Gamma / E ~ 5e-4: decay visible on desk-scale times
    return make_double_well(1.0, 0.5, 40.0)


@pytest.fixture(scope="session")
def moderate_resonances(moderate_well):
    return find_resonances(moderate_well, (0.5, 6.0), 0.5)


@pytest.fixture(scope="session")
def moderate_gamow(moderate_well, moderate_resonances):
    return gamow_from_resonance(moderate_well, moderate_resonances[0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    def _report(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

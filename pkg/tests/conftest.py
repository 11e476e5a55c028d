import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eaplab.spaces import CATALOG_NAMES, SpacePoint, builtin_space

settings.register_profile("eaplab", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("eaplab")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def spaces():
    return {name: builtin_space(name) for name in CATALOG_NAMES}


@pytest.fixture(params=CATALOG_NAMES)
def space(request):
    return builtin_space(request.param)


@pytest.fixture(scope="session")
def generic3():
    return builtin_space("generic3")


@pytest.fixture(scope="session")
def p2():
    return SpacePoint([0.3, -0.2], [0.7, 0.9])


def points(space, count=4, seed=7):
    return space.sample(count, seed=seed)


def maxabs(a):
    a = np.asarray(a, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0

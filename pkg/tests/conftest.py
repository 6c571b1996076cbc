import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from buckling_lanczos import problems
from buckling_lanczos.pencil import Pencil

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def tiny():
    """K = diag(1,0,0), K_G = diag(2,-1,0), Z_N = e2, Z_C = e3."""
    return Pencil.from_arrays(np.diag([1.0, 0.0, 0.0]), np.diag([2.0, -1.0, 0.0]),
                              np.eye(3)[:, [1]], np.eye(3)[:, [2]])


@pytest.fixture(scope="session")
def singular_pencils():
    """The 20 seeded random singular pencils shared by several tests."""
    return [problems.random_singular(s) for s in range(20)]


def sym(rng, n):
    A = rng.standard_normal((n, n))
    return A + A.T


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ballmax.geometry import BallSystem, Instance

settings.register_profile(
    "repo", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")

SQRT3 = np.sqrt(3.0)
Q3_CENTERS = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, SQRT3]])
Q4_CENTERS = np.array(
    [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 1.7320508, 0.0], [1.0, 0.5773503, 1.4]]
)
RBAR_Q3 = np.sqrt(0.44)


@pytest.fixture
def q3():
    return BallSystem(Q3_CENTERS, 1.2)


def q3_at(c0):
    return Instance.from_arrays(Q3_CENTERS, 1.2, c0)


def q4_at(c0):
    return Instance.from_arrays(Q4_CENTERS, 1.2, c0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

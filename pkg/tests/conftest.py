import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def open_sdf():
    """A 500 x 500 m walled box with no interior obstacles."""
    from mazeplan.envmap import OccupancyGrid, build_sdf

    return build_sdf(OccupancyGrid(np.zeros((501, 501), bool)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import SCORECARD
    except ImportError:
        return
    if SCORECARD:
        terminalreporter.section("acceptance criteria")
        for line in sorted(SCORECARD, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import settings

from dimkit import FIGURE6_CARPET, Countable, PointCloud, generate

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# lines reported by the acceptance suite, printed once at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def f1_cloud():
    return generate(Countable(1.0), 1e-6)


@pytest.fixture(scope="session")
def f4_cloud():
    return generate(Countable(4.0), 1e-6)


@pytest.fixture(scope="session")
def carpet_cloud():
    return generate(FIGURE6_CARPET, 2.0**-10)


@pytest.fixture(scope="session")
def unit_grid():
    return PointCloud(np.arange(1024) / 1024, 2.0**-10)

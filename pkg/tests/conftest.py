import numpy as np
import pytest

from cogfeedback import default_config
from cogfeedback.delay_power import min_powers

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def paper_config():
    return default_config()


@pytest.fixture(scope="session")
def paper_powers(paper_config):
    return [s.p_star for s in min_powers(paper_config)]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

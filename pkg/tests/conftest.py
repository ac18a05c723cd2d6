import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")

from tbma_aircomp.model import DataDistribution, SystemConfig  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def paper_cfg():
    return SystemConfig.from_snr_db(K=1000, N=64, snr_db=10.0)


@pytest.fixture
def uniform():
    return DataDistribution.uniform()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

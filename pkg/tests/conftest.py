import numpy as np
import pytest

from lutherfilter.datasets import load_synthetic

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def synthetic():
    return load_synthetic()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from zoomsib.env import ContextLaw, SIBInstance, get_link


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_instance(link="linear", d=2, K=3, sigma=0.0, theta=None, law=None):
    theta = np.eye(d)[0] if theta is None else np.asarray(theta, float)
    return SIBInstance(d, theta, get_link(link), sigma, K, law or ContextLaw())


def contexts_with_projections(zs, d=2):
    """Context rows whose projection on e1 equals ``zs``."""
    X = np.zeros((len(zs), d))
    X[:, 0] = zs
    return X


# Acceptance outcomes, one line each, echoed in the terminal summary so they
# survive pytest's output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

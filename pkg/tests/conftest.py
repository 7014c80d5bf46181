import numpy as np
import pytest

from stiffkit import jacobians
from stiffkit.generate import random_chain, random_spd

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ones_plus_identity():
    return np.eye(6) + np.ones((6, 6))


def chain_and_jp(seed, n_theta, n_q):
    chain = random_chain(np.random.default_rng(seed), n_theta, n_q)
    return chain, jacobians(chain), chain.spring_stiffness()


def spd(rng, n=6, lo=1.0, hi=10.0):
    return random_spd(rng, n, lo, hi)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

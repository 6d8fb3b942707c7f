import numpy as np
import pytest
from hypothesis import strategies as st

from mdpbounds.mdp import InducedChain, Mdp, Policy, garnet

P2 = np.array([[0.7, 0.3], [0.2, 0.8]])


def single_action_mdp(p, reward, mu) -> Mdp:
    p = np.asarray(p, dtype=float)
    return Mdp(p[:, None, :], np.asarray(reward, dtype=float)[:, None], mu)


@pytest.fixture
def two_state():
    """Two-state, one-action chain used throughout: P = [[0.7, 0.3], [0.2, 0.8]], r = (1, 0), mu = (1, 0)."""
    mdp = single_action_mdp(P2, [1.0, 0.0], [1.0, 0.0])
    return mdp, Policy(np.ones((2, 1)))


@pytest.fixture
def two_state_chain():
    return InducedChain(P2, np.array([1.0, 0.0]))


def random_stochastic(rng, n, m=None, positive=True):
    m = n if m is None else m
    a = rng.uniform(0.05 if positive else 0.0, 1.0, size=(n, m))
    return a / a.sum(axis=1, keepdims=True)


def random_pair(seed, n=None, m=None, branching=None):
    """A dense-enough Garnet instance with two random policies."""
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(2, 8))
    m = m or int(rng.integers(2, 4))
    b = branching or n
    mdp = garnet(n, m, b, seed=seed)
    return mdp, Policy.random(n, m, rng), Policy.random(n, m, rng)


seeds = st.integers(min_value=0, max_value=2**31 - 1)

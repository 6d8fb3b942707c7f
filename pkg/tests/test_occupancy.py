import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P2, random_pair, seeds
from mdpbounds.errors import UnreachableStatesWarning, ValidationError
from mdpbounds.linalg import stationary_distribution
from mdpbounds.mdp import InducedChain, induce_chain
from mdpbounds.occupancy import all_occupancies, discounted_transition, occupancy, series_terms

METHODS = ("resolvent", "series", "stationary")


class TestDiscountedTransition:
    def test_gamma_zero_rows_are_mu(self, two_state_chain):
        mu = np.array([0.3, 0.7])
        np.testing.assert_array_equal(
            discounted_transition(two_state_chain, mu, 0.0).matrix, np.outer(np.ones(2), mu)
        )

    def test_close_to_p_near_one(self, two_state_chain):
        mu = np.array([1.0, 0.0])
        pg = discounted_transition(two_state_chain, mu, 0.99).matrix
        assert np.abs(pg - P2).max() <= 0.01 * 2

    def test_two_state_by_hand(self, two_state_chain):
        pg = discounted_transition(two_state_chain, [1.0, 0.0], 0.9).matrix
        np.testing.assert_allclose(pg, [[0.73, 0.27], [0.28, 0.72]], atol=1e-15)

    def test_rows_dominate_restart(self):
        mdp, pi, _ = random_pair(4)
        g = 0.8
        pg = discounted_transition(induce_chain(mdp, pi), mdp.initial_dist, g).matrix
        assert np.all(pg >= (1 - g) * mdp.initial_dist[None, :] - 1e-15)
        np.testing.assert_allclose(pg.sum(axis=1), 1.0, atol=1e-12)

    @pytest.mark.parametrize("gamma", [-0.1, 1.0, 1.5, float("nan")])
    def test_gamma_range(self, two_state_chain, gamma):
        with pytest.raises(ValidationError):
            discounted_transition(two_state_chain, [1.0, 0.0], gamma)


class TestOccupancy:
    @pytest.mark.parametrize("method", METHODS)
    def test_gamma_zero_is_mu(self, two_state_chain, method):
        mu = np.array([0.3, 0.7])
        np.testing.assert_allclose(occupancy(two_state_chain, mu, 0.0, method).dist, mu, atol=1e-15)

    @pytest.mark.parametrize("method", METHODS)
    def test_two_state_by_hand(self, two_state_chain, method):
        # 0.1 * first row of (I - 0.9 P)^{-1} = 0.1 * (0.28, 0.27) / 0.055
        expected = 0.1 * np.array([0.28, 0.27]) / 0.055
        np.testing.assert_allclose(expected, [0.5090909090909, 0.4909090909091], atol=1e-12)
        dist = occupancy(two_state_chain, [1.0, 0.0], 0.9, method).dist
        np.testing.assert_allclose(dist, expected, atol=1e-12)

    def test_approaches_stationary(self, two_state_chain):
        dist = occupancy(two_state_chain, [1.0, 0.0], 0.99999).dist
        assert np.abs(dist - [0.4, 0.6]).sum() <= 1e-4

    def test_continuity_tail_monotone(self):
        mdp, pi, _ = random_pair(6)
        chain = induce_chain(mdp, pi)
        d = stationary_distribution(chain.transition)
        gaps = [
            np.abs(occupancy(chain, mdp.initial_dist, 1 - 10.0**-k).dist - d).sum() for k in range(1, 7)
        ]
        assert all(b <= a for a, b in zip(gaps[2:], gaps[3:]))
        assert gaps[-1] < 1e-4

    def test_series_term_count(self):
        t = series_terms(0.9)
        assert 0.9 ** (t + 1) <= 1e-14 < 0.9**t

    def test_unreachable_warning(self):
        chain = InducedChain(np.array([[1.0, 0.0], [0.5, 0.5]]), np.zeros(2))
        with pytest.warns(UnreachableStatesWarning):
            dist = occupancy(chain, [1.0, 0.0], 0.9).dist
        assert dist[1] == 0.0

    def test_unknown_method(self, two_state_chain):
        with pytest.raises(ValueError):
            occupancy(two_state_chain, [1.0, 0.0], 0.5, "bogus")

    @given(seeds, st.sampled_from([0.5, 0.9, 0.99]))
    @settings(max_examples=40, deadline=None)
    def test_stationary_for_discounted_chain(self, seed, gamma):
        mdp, pi, _ = random_pair(seed)
        chain = induce_chain(mdp, pi)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnreachableStatesWarning)
            occ = all_occupancies(chain, mdp.initial_dist, gamma)
        pg = discounted_transition(chain, mdp.initial_dist, gamma)
        for o in occ.values():
            assert o.stationarity_residual(pg) <= 1e-9
            assert o.dist.sum() == pytest.approx(1.0, abs=1e-10)
            assert np.all(o.dist >= -1e-15)
        for a in METHODS:
            for b in METHODS:
                assert np.abs(occ[a].dist - occ[b].dist).sum() <= 1e-8

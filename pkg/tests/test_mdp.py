import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import P2, random_pair, seeds, single_action_mdp
from mdpbounds import io as mio
from mdpbounds.errors import ValidationError
from mdpbounds.mdp import Mdp, Policy, chain_diagnostics, garnet, induce_chain, validate_reachability


class TestValidation:
    def test_rejects_non_stochastic_row_with_index(self):
        t = np.zeros((2, 1, 2))
        t[0, 0] = [0.5, 0.5]
        t[1, 0] = [0.5, 0.6]
        with pytest.raises(ValidationError) as exc:
            Mdp(t, np.zeros((2, 1)), [1.0, 0.0])
        assert "[1, 0]" in exc.value.location

    def test_rejects_negative_probability(self):
        t = np.array([[[1.2, -0.2]], [[0.0, 1.0]]])
        with pytest.raises(ValidationError):
            Mdp(t, np.zeros((2, 1)), [1.0, 0.0])

    def test_rejects_bad_initial_dist(self):
        with pytest.raises(ValidationError):
            single_action_mdp(P2, [0.0, 0.0], [0.6, 0.6])

    def test_rejects_nonfinite_reward(self):
        with pytest.raises(ValidationError):
            single_action_mdp(P2, [np.inf, 0.0], [1.0, 0.0])

    def test_policy_shape_mismatch(self, two_state):
        mdp, _ = two_state
        with pytest.raises(ValidationError):
            induce_chain(mdp, Policy.uniform(2, 2))

    def test_arrays_are_read_only(self, two_state):
        mdp, _ = two_state
        with pytest.raises(ValueError):
            mdp.transition[0, 0, 0] = 0.0


class TestInduceChain:
    def test_deterministic_policy_selects_rows(self):
        mdp = garnet(4, 3, 2, seed=3)
        chain = induce_chain(mdp, Policy.deterministic([2, 2, 2, 2], 3))
        np.testing.assert_array_equal(chain.transition, mdp.transition[:, 2, :])

    def test_reward_is_convex_combination(self):
        mdp = Mdp(np.ones((1, 2, 1)), [[0.0, 2.0]], [1.0])
        chain = induce_chain(mdp, Policy([[0.5, 0.5]]))
        assert chain.reward[0] == pytest.approx(1.0)

    def test_matches_triple_loop(self):
        mdp, pi, _ = random_pair(11, n=2, m=2)
        chain = induce_chain(mdp, pi)
        brute = np.zeros((2, 2))
        for x in range(2):
            for a in range(2):
                for y in range(2):
                    brute[x, y] += pi.probs[x, a] * mdp.transition[x, a, y]
        np.testing.assert_allclose(chain.transition, brute, atol=1e-15)

    @given(seeds)
    @settings(max_examples=50, deadline=None)
    def test_row_stochastic(self, seed):
        mdp, pi, _ = random_pair(seed)
        p = induce_chain(mdp, pi).transition
        assert np.all(p >= 0)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)

    @given(seeds, st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.9, 1.0]))
    @settings(max_examples=50, deadline=None)
    def test_linear_in_policy(self, seed, alpha):
        mdp, pi, other = random_pair(seed)
        mixed = induce_chain(mdp, pi.mix(other, alpha))
        a, b = induce_chain(mdp, pi), induce_chain(mdp, other)
        np.testing.assert_allclose(
            mixed.transition, (1 - alpha) * a.transition + alpha * b.transition, atol=1e-14
        )
        np.testing.assert_allclose(mixed.reward, (1 - alpha) * a.reward + alpha * b.reward, atol=1e-14)


class TestDiagnostics:
    def test_positive_chain(self):
        diag = chain_diagnostics(P2)
        assert diag.unichain and diag.irreducible and diag.aperiodic

    def test_identity_has_two_classes(self):
        diag = chain_diagnostics(np.eye(2))
        assert not diag.unichain
        assert len(diag.recurrent_classes) == 2

    def test_three_cycle_period(self):
        cycle = np.roll(np.eye(3), 1, axis=1)
        diag = chain_diagnostics(cycle)
        assert diag.irreducible and not diag.aperiodic
        assert diag.periods == (3,)

    def test_transient_state(self):
        p = np.array([[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]])
        diag = chain_diagnostics(p)
        assert diag.unichain and not diag.irreducible
        assert diag.transient == (0, 2)

    def test_reachability_from_mu(self):
        t = np.array([[[1.0, 0.0]], [[0.0, 1.0]]])
        mdp = Mdp(t, np.zeros((2, 1)), [1.0, 0.0])
        diag = validate_reachability(mdp, Policy(np.ones((2, 1))))
        assert diag.reachable == (0,)
        assert not diag.unichain
        assert diag.reachable_unichain


class TestGarnet:
    def test_dense_when_branching_full(self):
        mdp = garnet(5, 2, 5, seed=1)
        assert np.all(mdp.transition > 0)
        assert np.all(mdp.reward != 0)

    def test_branching_count(self):
        mdp = garnet(8, 3, 3, seed=2)
        assert np.all((mdp.transition > 0).sum(axis=2) == 3)

    def test_same_seed_bitwise_identical(self):
        assert mio.dumps_mdp(garnet(6, 3, 2, 0.3, seed=9)) == mio.dumps_mdp(garnet(6, 3, 2, 0.3, seed=9))

    def test_sparsity_one_zeros_rewards(self):
        assert np.all(garnet(4, 2, 2, 1.0, seed=0).reward == 0)

    def test_valid_over_1000_seeds(self):
        for seed in range(1000):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(1, 12))
            mdp = garnet(n, int(rng.integers(1, 5)), int(rng.integers(1, n + 1)), 0.2, seed=seed)
            # re-running the constructor re-validates every invariant
            Mdp(mdp.transition, mdp.reward, mdp.initial_dist)

    @pytest.mark.parametrize("args", [(0, 2, 1), (3, 0, 1), (3, 2, 0), (3, 2, 4)])
    def test_bad_parameters(self, args):
        with pytest.raises(ValidationError):
            garnet(*args)

    def test_bad_sparsity(self):
        with pytest.raises(ValidationError):
            garnet(3, 2, 2, reward_sparsity=1.5)

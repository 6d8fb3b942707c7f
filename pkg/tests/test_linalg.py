import numpy as np
import pytest
from hypothesis import given, settings

from conftest import P2, random_stochastic, seeds
from mdpbounds import linalg
from mdpbounds.errors import ChainStructureError, SingularMatrixError


class TestSolve:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0])
        np.testing.assert_array_equal(linalg.solve(np.eye(3), b), b)

    def test_diagonal(self):
        np.testing.assert_allclose(linalg.solve([[2.0, 0.0], [0.0, 4.0]], [2.0, 8.0]), [1.0, 2.0])

    def test_random_residual(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(10, 10)) + 10 * np.eye(10)
        b = rng.normal(size=10)
        x = linalg.solve(a, b)
        assert np.abs(a @ x - b).max() <= 1e-9 * (1 + np.abs(b).max())

    def test_singular(self):
        with pytest.raises(SingularMatrixError):
            linalg.solve([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])

    def test_transpose_solve(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 4)) + 4 * np.eye(4)
        b = rng.normal(size=4)
        np.testing.assert_allclose(linalg.LUFactor(a).solve(b, transpose=True), np.linalg.solve(a.T, b))


class TestStationary:
    def test_single_state(self):
        np.testing.assert_allclose(linalg.stationary_distribution([[1.0]]), [1.0])

    def test_two_state_closed_form(self):
        # d = (q, p) / (p + q) with p = 0.3, q = 0.2
        d = linalg.stationary_distribution(P2)
        np.testing.assert_allclose(d, [0.4, 0.6], atol=1e-15)
        assert np.abs(d @ P2 - d).sum() <= 1e-10

    def test_doubly_stochastic(self):
        p = np.array([[0.1, 0.6, 0.3], [0.5, 0.2, 0.3], [0.4, 0.2, 0.4]])
        np.testing.assert_allclose(linalg.stationary_distribution(p), np.full(3, 1 / 3), atol=1e-14)

    def test_two_classes_rejected(self):
        with pytest.raises(ChainStructureError):
            linalg.stationary_distribution(np.eye(2))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_fixed_point(self, seed):
        rng = np.random.default_rng(seed)
        p = random_stochastic(rng, int(rng.integers(1, 15)))
        d = linalg.stationary_distribution(p)
        assert np.all(d >= 0) and d.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.abs(d @ p - d).sum() <= 1e-10


class TestGroupInverse:
    def test_rank_one(self):
        d = np.array([0.2, 0.5, 0.3])
        p = np.outer(np.ones(3), d)
        res = linalg.group_inverse(p, d)
        np.testing.assert_allclose(res.d_matrix, np.eye(3) - p, atol=1e-14)
        a = np.eye(3) - p
        np.testing.assert_allclose(a @ res.d_matrix @ a, a, atol=1e-14)

    def test_two_state_closed_form(self):
        expected = (np.eye(2) - np.outer(np.ones(2), [0.4, 0.6])) / 0.5
        np.testing.assert_allclose(expected, [[1.2, -1.2], [-0.8, 0.8]], atol=1e-15)
        res = linalg.group_inverse(P2)
        np.testing.assert_allclose(res.d_matrix, expected, atol=1e-14)
        series = linalg.group_inverse_series(P2, np.array([0.4, 0.6]), tail_tol=1e-12)
        np.testing.assert_allclose(res.d_matrix, series, atol=1e-11)
        assert res.max_residual <= 1e-8

    def test_series_cross_check_random(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            p = random_stochastic(rng, 5)
            res = linalg.group_inverse(p)
            series = linalg.group_inverse_series(p, res.stationary)
            assert np.abs(res.d_matrix - series).max() <= 1e-8

    def test_rejects_periodic(self):
        with pytest.raises(ChainStructureError):
            linalg.group_inverse(np.roll(np.eye(3), 1, axis=1))

    def test_rejects_multichain(self):
        with pytest.raises(ChainStructureError):
            linalg.group_inverse(np.eye(2))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_defining_identities(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 15))
        p = random_stochastic(rng, n)
        res = linalg.group_inverse(p)
        a = np.eye(n) - p
        dmat = res.d_matrix
        proj = np.eye(n) - np.outer(np.ones(n), res.stationary)
        assert res.max_residual <= 1e-8
        np.testing.assert_allclose(dmat @ a, proj, atol=1e-8)
        np.testing.assert_allclose(a @ dmat, proj, atol=1e-8)
        assert np.abs(dmat @ np.ones(n)).max() <= 1e-9


class TestSubdominant:
    def test_two_state(self):
        assert linalg.subdominant_modulus(P2) == pytest.approx(0.5, abs=1e-12)

    def test_rank_one(self):
        d = np.array([0.25, 0.75])
        assert linalg.subdominant_modulus(np.outer(np.ones(2), d), d) == pytest.approx(0.0, abs=1e-12)

    def test_cycle(self):
        cycle = np.roll(np.eye(3), 1, axis=1)
        assert linalg.subdominant_modulus(cycle, np.full(3, 1 / 3)) == pytest.approx(1.0, abs=1e-12)

    def test_matches_full_spectrum(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p = random_stochastic(rng, 6)
            mods = np.sort(np.abs(np.linalg.eigvals(p)))
            assert linalg.subdominant_modulus(p) == pytest.approx(mods[-2], abs=1e-8)

"""Dense linear algebra: Cholesky, MVN sampling, weighted posterior moments."""

import numpy as np
import pytest

from pgbayes.errors import FactorizationError
from pgbayes.linalg import cholesky, mvn_sample, posterior_moments
from pgbayes.rng import RngStream


class TestCholesky:
    def test_identity(self):
        assert np.array_equal(cholesky(np.eye(3)), np.eye(3))

    def test_hand_factorization(self):
        a = np.array([[4.0, 2.0], [2.0, 3.0]])
        expected = np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]])
        assert np.allclose(cholesky(a), expected, rtol=1e-12)

    def test_round_trip(self):
        rng = RngStream(0)
        m = rng.standard_normal((4, 4))
        a = m @ m.T + 4 * np.eye(4)
        low = cholesky(a)
        assert np.allclose(low @ low.T, a, rtol=1e-10)

    def test_negative_eigenvalue_raises(self):
        a = np.diag([1.0, -1.0])
        with pytest.raises(FactorizationError):
            cholesky(a)

    def test_asymmetric_raises(self):
        a = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(FactorizationError):
            cholesky(a)


class TestMvnSample:
    def test_unit_variance(self, rng):
        draws = np.array([mvn_sample(np.zeros(2), 1.0, np.eye(2), rng)
                          for _ in range(20_000)])
        assert np.allclose(draws.var(axis=0), 1.0, atol=0.05)

    def test_scale_multiplies_variance(self, rng):
        draws = np.array([mvn_sample(np.zeros(1), 4.0, np.eye(1), rng)
                          for _ in range(20_000)])
        assert draws.var() == pytest.approx(4.0, rel=0.05)

    def test_correlated_covariance(self, rng):
        cov = np.array([[2.0, 0.8], [0.8, 1.0]])
        low = cholesky(cov)
        draws = np.array([mvn_sample(np.array([1.0, -1.0]), 2.0, low, rng)
                          for _ in range(40_000)])
        assert np.allclose(np.cov(draws.T), 2.0 * cov, atol=0.08)
        assert np.allclose(draws.mean(axis=0), [1.0, -1.0], atol=0.05)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            mvn_sample(np.zeros(3), 1.0, np.eye(2), rng)


class TestPosteriorMoments:
    def test_empty_data_returns_prior(self):
        prec = np.linalg.inv(np.diag([4.0, 9.0]))
        m = posterior_moments(np.empty((0, 2)), np.empty(0), np.empty(0), prec)
        assert np.allclose(m.cov, np.diag([4.0, 9.0]))
        assert np.allclose(m.b, 0.0)

    def test_scalar_hand_case(self):
        # d=1: prior precision 1, one obs x=1, weight 2, response 3
        m = posterior_moments(np.array([[1.0]]), np.array([3.0]),
                              np.array([2.0]), np.array([[1.0]]))
        assert m.cov[0, 0] == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert m.b[0] == pytest.approx(2.0, rel=1e-12)

    def test_unit_weights_is_ridge(self):
        rng = RngStream(2)
        x = rng.standard_normal((20, 3))
        z = rng.standard_normal(20)
        lam = 0.5
        m = posterior_moments(x, z, np.ones(20), lam * np.eye(3))
        direct = np.linalg.solve(lam * np.eye(3) + x.T @ x, x.T @ z)
        assert np.allclose(m.b, direct, rtol=1e-10)

    def test_matches_explicit_inversion(self):
        # random 3x3 instances against a direct matrix-inverse oracle
        rng = RngStream(7)
        for _ in range(25):
            x = rng.standard_normal((12, 3))
            z = rng.standard_normal(12)
            w = rng.uniform(0.1, 5.0, size=12)
            a = rng.standard_normal((3, 3))
            prec = a @ a.T + np.eye(3)
            m = posterior_moments(x, z, w, prec)
            cov_direct = np.linalg.inv(prec + (x.T * w) @ x)
            b_direct = cov_direct @ (x.T @ (w * z))
            assert np.allclose(m.cov, cov_direct, atol=1e-8)
            assert np.allclose(m.b, b_direct, atol=1e-8)
            assert np.allclose(m.chol @ m.chol.T, m.cov, atol=1e-10)

    def test_prior_linear_term(self):
        prec = np.eye(2)
        offset = np.array([1.0, -2.0])
        m = posterior_moments(np.empty((0, 2)), np.empty(0), np.empty(0), prec,
                              prior_linear=offset)
        assert np.allclose(m.b, offset)

    def test_nonpositive_weights_raise(self):
        with pytest.raises(ValueError):
            posterior_moments(np.ones((1, 1)), np.ones(1), np.zeros(1), np.eye(1))

    def test_solve_residual(self):
        rng = RngStream(11)
        x = rng.standard_normal((30, 4))
        z = rng.standard_normal(30)
        w = rng.uniform(0.5, 2.0, size=30)
        prec = np.eye(4)
        m = posterior_moments(x, z, w, prec)
        lhs = (prec + (x.T * w) @ x) @ m.b
        rhs = x.T @ (w * z)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * max(np.linalg.norm(rhs), 1.0)

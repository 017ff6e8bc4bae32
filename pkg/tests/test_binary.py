"""Binary probit/logit sampler: component algebra, invariants, posterior checks."""

import numpy as np
import pytest
from scipy import stats as sps

from conftest import FixedUniform, ks_same_posterior
from pgbayes import baselines, binary
from pgbayes.errors import ConstraintError
from pgbayes.linalg import posterior_moments
from pgbayes.model import BinaryData, McmcConfig, Priors, simulate_dataset
from pgbayes.rng import RngStream


class StubRng(FixedUniform):
    """Deterministic stub: fixed uniform, zero normals, unit gamma draws."""

    def __init__(self, u=0.5):
        super().__init__(u)

    def standard_normal(self, *args, **kwargs):
        return 0.0

    def gamma(self, shape, scale=1.0, size=None):
        return 1.0


class TestSampleUtilities:
    def test_logit_hand_values(self):
        # lambda=1, U=0.5: y=1 -> log 3, y=0 -> -log 3
        rng = FixedUniform(0.5)
        z = binary.sample_utilities(np.zeros(2), np.array([1, 0]), "logit", rng)
        assert z[0] == pytest.approx(np.log(3.0), rel=1e-12)
        assert z[1] == pytest.approx(-np.log(3.0), rel=1e-12)

    def test_probit_hand_value(self):
        # y=1, eta=0, U=0.5: -Phi^{-1}(0.25), frozen from the normal oracle
        rng = FixedUniform(0.5)
        z = binary.sample_utilities(np.zeros(1), np.array([1]), "probit", rng)
        assert z[0] == pytest.approx(0.6744897501960817, rel=1e-10)

    def test_probit_is_truncated_normal(self, rng):
        draws = np.concatenate([
            binary.sample_utilities(np.zeros(5000), np.ones(5000, dtype=int),
                                    "probit", rng)
            for _ in range(4)])
        cdf = lambda q: (sps.norm.cdf(q) - 0.5) / 0.5
        assert draws.min() > 0
        assert sps.kstest(draws, cdf).pvalue > 0.01

    def test_sign_consistency_extreme_predictors(self, rng):
        eta = np.array([-700.0, -50.0, -5.0, 0.0, 5.0, 50.0, 700.0])
        for link in ("logit", "probit"):
            for yval in (0, 1):
                y = np.full(eta.size, yval)
                z = binary.sample_utilities(eta, y, link, rng)
                assert np.all(np.isfinite(z)), (link, yval)
                assert np.all((z > 0) == (yval == 1)), (link, yval)

    def test_logit_marginal_distribution(self, rng):
        # unconditional on y the utilities are logistic around eta
        eta = 0.7
        n = 40_000
        y = (rng.uniform(size=n) < sps.logistic.cdf(eta)).astype(int)
        z = binary.sample_utilities(np.full(n, eta), y, "logit", rng)
        assert sps.kstest(z, lambda q: sps.logistic.cdf(q, loc=eta)).pvalue > 0.01


class TestWorkingStar:
    def test_conditional_algebra(self):
        # G0 = A0dd = 1, beta_d = 2: g1 = -1, G1 = 0.5; with zeroed normal
        # the draw is sqrt(delta*) * g1 and delta* = D0 under the stub gamma
        prior = Priors(a0=1.0, g0=1.0)
        delta_star, gamma_star = binary.sample_working_star(2.0, 1.0, prior,
                                                            StubRng())
        assert delta_star == pytest.approx(prior.big_d0)
        assert gamma_star == pytest.approx(-np.sqrt(prior.big_d0))

    def test_zero_intercept_centers_threshold(self, rng):
        prior = Priors()
        draws = np.array([binary.sample_working_star(0.0, 100.0, prior, rng)[1]
                          for _ in range(20_000)])
        assert abs(draws.mean()) < 4 * draws.std() / np.sqrt(draws.size)

    def test_diffuse_threshold_limit(self, rng):
        # G0 -> inf: gamma*/sqrt(delta*) ~ N(-beta_d, A0dd)
        prior = Priors(a0=2.0, g0=1e12)
        ratio = []
        for _ in range(20_000):
            d, g = binary.sample_working_star(1.5, 2.0, prior, rng)
            ratio.append(g / np.sqrt(d))
        ratio = np.asarray(ratio)
        assert ratio.mean() == pytest.approx(-1.5, abs=0.05)
        assert ratio.var() == pytest.approx(2.0, rel=0.1)


class TestGammaBounds:
    def test_two_sided(self):
        lo, hi = binary.gamma_bounds(np.array([-1.0, 2.0]), np.array([0, 1]))
        assert (lo, hi) == (-1.0, 2.0)

    def test_one_sided_conventions(self):
        lo, hi = binary.gamma_bounds(np.array([0.5, 1.5]), np.array([1, 1]))
        assert lo == -np.inf and hi == 0.5
        lo, hi = binary.gamma_bounds(np.array([-0.5, -1.5]), np.array([0, 0]))
        assert lo == -0.5 and hi == np.inf

    def test_inverted_bounds_raise(self):
        with pytest.raises(ConstraintError):
            binary.gamma_bounds(np.array([2.0, 1.0]), np.array([0, 1]))


class TestDeltaConditional:
    def test_scalar_hand_case(self):
        # d=1, A0=1, x=1, omega=2, z=3, gamma=0, G0=1:
        # B_N = 1/3, b_N = 2, D_N = D0 + 1/2*2*(3-2)^2 + 1/2*4 = D0 + 3
        prior = Priors(a0=1.0, g0=1.0)
        x = np.array([[1.0]])
        omega = np.array([2.0])
        z = np.array([3.0])
        prec = np.array([[1.0]])
        moments = posterior_moments(x, z, omega, prec)
        shape, rate = binary.delta_shape_rate(0.0, z, omega, x, moments, prior, prec)
        assert shape == pytest.approx(prior.d0 + 0.5 + 0.5)
        assert rate == pytest.approx(prior.big_d0 + 3.0, rel=1e-12)

    def test_empty_data_reduction(self):
        prior = Priors()
        prec = np.eye(2) / 100.0
        moments = posterior_moments(np.empty((0, 2)), np.empty(0), np.empty(0), prec)
        shape, rate = binary.delta_shape_rate(1.0, np.empty(0), np.empty(0),
                                              np.empty((0, 2)), moments, prior, prec)
        assert shape == pytest.approx(prior.d0 + 0.5)
        assert rate == pytest.approx(prior.big_d0 + 1.0 / (2 * prior.g0))

    def test_shape_is_exact(self):
        prior = Priors()
        n = 37
        rng = RngStream(0)
        x = np.column_stack([rng.standard_normal(n), np.ones(n)])
        z = rng.standard_normal(n)
        w = rng.uniform(0.2, 1.0, size=n)
        prec = np.eye(2) / 100.0
        moments = posterior_moments(x, z, w, prec)
        shape, _ = binary.delta_shape_rate(0.3, z, w, x, moments, prior, prec)
        assert shape == prior.d0 + 0.5 + n / 2.0
        shape_scale_only, _ = binary.delta_shape_rate(
            0.0, z, w, x, moments, prior, prec, threshold=False)
        assert shape_scale_only == prior.d0 + n / 2.0


class TestSweep:
    def test_sign_consistency_one_success(self):
        data = simulate_dataset("logit", 400, RngStream(3), d=1, one_success=True)
        prior = Priors()
        config = McmcConfig(draws=1, burnin=0)
        state = binary.BinaryState(beta=np.zeros(1), z=np.zeros(400),
                                   omega=np.ones(400))
        rng = RngStream(4)
        for _ in range(50):
            state = binary.upg_binary_sweep(state, data, prior, config, rng)
            assert np.all((state.z > 0) == (data.y == 1))
            assert state.delta > 0

    def test_back_transform_round_trip(self, rng):
        # expand then invert recovers the coefficients to machine precision
        for _ in range(100):
            d = 4
            beta = rng.standard_normal(d)
            gamma = rng.standard_normal() * 3
            delta = rng.uniform(0.1, 5.0)
            expanded = np.sqrt(delta) * beta
            expanded[-1] += gamma
            back = expanded / np.sqrt(delta)
            back[-1] = (expanded[-1] - gamma) / np.sqrt(delta)
            assert np.allclose(back, beta, rtol=0, atol=1e-14)

    def test_run_chain_reproducible(self):
        data = simulate_dataset("logit", 60, RngStream(5), d=2)
        config = McmcConfig(draws=50, burnin=10, seed=9)
        a = binary.run_chain(data, Priors(), config)
        b = binary.run_chain(data, Priors(), config)
        assert np.array_equal(a.beta, b.beta)
        assert a.beta.shape == (50, 2)

    def test_probit_no_boost_equals_plain_da(self):
        # identical conditional laws and rng consumption: byte-equal chains
        data = simulate_dataset("probit", 120, RngStream(6), d=2)
        prior = Priors()
        config = McmcConfig(draws=300, burnin=50, seed=13, boost="none",
                            link="probit")
        upg = binary.run_chain(data, prior, config, rng=RngStream(13))
        ac = baselines.run_albert_chib(data, prior, config, rng=RngStream(13))
        assert np.array_equal(upg.beta, ac.beta)


class TestBoostInvariance:
    def test_boost_modes_share_posterior(self):
        # full / scale-only / none target the same posterior: two-sample KS
        # on thinned 20k-draw chains, per coordinate, Bonferroni-corrected
        data = simulate_dataset("logit", 200, RngStream(21), d=2,
                                beta=np.array([1.0, 0.0]))
        prior = Priors()
        chains = {}
        for boost in ("full", "scale", "none"):
            config = McmcConfig(draws=20_000, burnin=2_000, seed=77, boost=boost)
            chains[boost] = binary.run_chain(data, prior, config).beta
        n_tests = 2 * 2
        for other in ("scale", "none"):
            for j in range(2):
                p = ks_same_posterior(chains["full"][:, j], chains[other][:, j])
                assert p > 0.01 / n_tests, (other, j, p)

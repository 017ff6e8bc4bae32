"""Baseline samplers: plain probit DA, marginal-model PG, adaptive MH."""

import numpy as np
import pytest
from scipy import stats as sps

from pgbayes import baselines, binary
from pgbayes.diagnostics import mc_stderr
from pgbayes.model import McmcConfig, Priors, simulate_dataset
from pgbayes.rng import RngStream


def agree(chain_a, chain_b, factor=3.0):
    """Means agree within `factor` combined IF-adjusted standard errors."""
    se = np.hypot(mc_stderr(chain_a), mc_stderr(chain_b))
    return abs(chain_a.mean() - chain_b.mean()) < factor * se


class TestPsLogit:
    def test_single_sweep_deterministic(self):
        data = simulate_dataset("logit", 40, RngStream(1), d=2)
        prior = Priors()
        a = baselines.ps_logit_sweep(np.zeros(2), data, prior, RngStream(3))
        b = baselines.ps_logit_sweep(np.zeros(2), data, prior, RngStream(3))
        assert np.array_equal(a, b)

    def test_posterior_agreement_with_boosted(self):
        data = simulate_dataset("logit", 200, RngStream(2), d=2,
                                beta=np.array([1.0, 0.3]))
        prior = Priors()
        config = McmcConfig(draws=15_000, burnin=2_000, seed=5)
        upg = binary.run_chain(data, prior, config)
        ps = baselines.run_ps_logit(data, prior, config)
        for j in range(2):
            assert agree(upg.beta[:, j], ps.beta[:, j]), j


class TestPsMnl:
    def test_m1_reduces_to_logit_sampler(self):
        bin_data = simulate_dataset("logit", 80, RngStream(4), d=2)
        from pgbayes.model import MultinomialData

        mnl_data = MultinomialData(x=bin_data.x, y=bin_data.y, m=1)
        prior = Priors()
        config = McmcConfig(draws=200, burnin=20, seed=8)
        a = baselines.run_ps_logit(bin_data, prior, config, rng=RngStream(8))
        b = baselines.run_ps_mnl(mnl_data, prior, config, rng=RngStream(8))
        assert np.allclose(a.beta, b.beta)


class TestAmh:
    def test_first_iterations_use_unit_variance(self):
        # proposals before iteration 100 ignore the empty history
        data = simulate_dataset("logit", 30, RngStream(7), d=1)
        state = baselines.AmhState(theta=np.zeros(1))
        state = baselines.amh_sweep(state, data, Priors(), "logit", RngStream(9))
        assert state.k == 1

    def test_welford_matches_batch_oracle(self):
        data = simulate_dataset("logit", 80, RngStream(11), d=2)
        prior = Priors()
        state = baselines.AmhState(theta=np.zeros(2))
        rng = RngStream(12)
        history = []
        for _ in range(400):
            state = baselines.amh_sweep(state, data, prior, "logit", rng)
            history.append(state.theta.copy())
        history = np.asarray(history)
        batch_mean = history.mean(axis=0)
        batch_sq = ((history - batch_mean) ** 2).sum(axis=0)
        assert np.allclose(state.mean, batch_mean, atol=1e-10)
        assert np.allclose(state.sq_dev, batch_sq, atol=1e-8)

    def test_acceptance_band_after_adaptation(self):
        data = simulate_dataset("logit", 1000, RngStream(13), d=2,
                                beta=np.array([1.0, 0.0]))
        prior = Priors()
        state = baselines.AmhState(theta=np.zeros(2))
        rng = RngStream(14)
        for _ in range(500):
            state = baselines.amh_sweep(state, data, prior, "logit", rng)
        state.accepted = state.proposed = 0
        for _ in range(1500):
            state = baselines.amh_sweep(state, data, prior, "logit", rng)
        assert 0.1 < state.accept_rate < 0.7

    def test_posterior_agreement(self):
        data = simulate_dataset("logit", 200, RngStream(15), d=2,
                                beta=np.array([0.5, -0.5]))
        prior = Priors()
        config = McmcConfig(draws=15_000, burnin=2_000, seed=16)
        upg = binary.run_chain(data, prior, config)
        amh = baselines.run_amh(data, prior, config)
        for j in range(2):
            assert agree(upg.beta[:, j], amh.beta[:, j]), j


class TestAlbertChib:
    def test_posterior_agreement_with_boosted_probit(self):
        data = simulate_dataset("probit", 200, RngStream(17), d=2,
                                beta=np.array([0.8, 0.2]))
        prior = Priors()
        config = McmcConfig(draws=15_000, burnin=2_000, seed=18, link="probit")
        upg = binary.run_chain(data, prior, config)
        ac = baselines.run_albert_chib(data, prior, config)
        for j in range(2):
            assert agree(upg.beta[:, j], ac.beta[:, j]), j

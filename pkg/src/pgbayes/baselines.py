"""Comparison samplers: classic probit DA, marginal-model Polya-Gamma, adaptive MH.

Every baseline targets the same coefficient prior as the boosted samplers,
N(0, A0 + G0 e_d e_d'), so posteriors are directly comparable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .binary import sample_utilities
from .dist import pg_sample_many
from .linalg import mvn_sample, posterior_moments
from .model import (
    BinaryData,
    BinomialData,
    Draws,
    McmcConfig,
    MultinomialData,
    Priors,
    loglik_binary,
    loglik_binomial,
    loglik_mnl,
)
from .rng import RngStream

__all__ = [
    "albert_chib_sweep",
    "ps_logit_sweep",
    "ps_mnl_sweep",
    "AmhState",
    "amh_sweep",
    "run_albert_chib",
    "run_ps_logit",
    "run_ps_mnl",
    "run_amh",
]


def _marginal_precision(prior: Priors, d: int) -> np.ndarray:
    return np.linalg.inv(prior.marginal_cov(d))


def albert_chib_sweep(beta, data: BinaryData, prior: Priors, rng: RngStream,
                      prior_precision=None):
    """Plain probit data augmentation: truncated-normal utilities, Gaussian beta."""
    if prior_precision is None:
        prior_precision = _marginal_precision(prior, data.dim)
    z = sample_utilities(data.x @ beta, data.y, "probit", rng)
    moments = posterior_moments(data.x, z, np.ones(data.n), prior_precision)
    return mvn_sample(moments.b, 1.0, moments.chol, rng)


def ps_logit_sweep(beta, data: BinaryData, prior: Priors, rng: RngStream,
                   prior_precision=None):
    """Marginal-model PG sampler: omega_i ~ PG(1, x_i beta), then Gaussian beta."""
    if prior_precision is None:
        prior_precision = _marginal_precision(prior, data.dim)
    eta = data.x @ beta
    omega = pg_sample_many(1, np.abs(eta), rng)
    kappa = data.y - 0.5
    moments = posterior_moments(data.x, kappa / omega, omega, prior_precision)
    return mvn_sample(moments.b, 1.0, moments.chol, rng)


def ps_mnl_sweep(beta, data: MultinomialData, prior: Priors, rng: RngStream,
                 prior_precision=None):
    """Per-category conditional PG update of the multinomial logit.

    Category k is a binary logit for 1{y=k} with linear predictor
    x beta_k - c_k, where c_k is the log-sum of the other categories'
    scales (an offset absorbed into the PG pseudo-response).
    """
    if prior_precision is None:
        prior_precision = _marginal_precision(prior, data.dim)
    beta = beta.copy()
    util = np.concatenate([np.zeros((data.n, 1)), data.x @ beta.T], axis=1)
    for k in range(1, data.m + 1):
        others = np.delete(util, k, axis=1)
        offset = np.logaddexp.reduce(others, axis=1)
        eta = util[:, k] - offset
        omega = pg_sample_many(1, np.abs(eta), rng)
        kappa = (data.y == k) - 0.5
        moments = posterior_moments(data.x, kappa / omega + offset, omega,
                                    prior_precision)
        beta[k - 1] = mvn_sample(moments.b, 1.0, moments.chol, rng)
        util[:, k] = data.x @ beta[k - 1]
    return beta


@dataclass
class AmhState:
    """Componentwise adaptive MH state with online history moments."""

    theta: np.ndarray
    mean: np.ndarray = field(init=False)
    sq_dev: np.ndarray = field(init=False)      # sum of squared deviations
    k: int = 0
    accepted: int = 0
    proposed: int = 0

    def __post_init__(self):
        self.mean = np.zeros_like(self.theta)
        self.sq_dev = np.zeros_like(self.theta)

    def record(self):
        """Welford update of the per-component history mean and variance."""
        self.k += 1
        dm = self.theta - self.mean
        self.mean += dm / self.k
        self.sq_dev += dm * (self.theta - self.mean)

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else 0.0


def _log_posterior(theta, data, prior: Priors, model: str, prec) -> float:
    if model == "mnl":
        ll = loglik_mnl(theta.reshape(data.m, data.dim), data)
        quad = sum(theta.reshape(data.m, data.dim)[k] @ prec
                   @ theta.reshape(data.m, data.dim)[k] for k in range(data.m))
        return ll - 0.5 * quad
    if model == "binomial":
        ll = loglik_binomial(theta, data)
    elif model in ("logit", "probit"):
        ll = loglik_binary(theta, data, link=model)
    else:
        raise ValueError(f"unknown AMH model {model!r}")
    return ll - 0.5 * float(theta @ prec @ theta)


def amh_sweep(state: AmhState, data, prior: Priors, model: str, rng: RngStream,
              s: float = 5.66, prior_precision=None) -> AmhState:
    """One componentwise adaptive MH sweep.

    Proposal variance per component is s/k times the component's historical
    chain variance; the first 100 iterations use unit variance.
    """
    if prior_precision is None:
        prior_precision = _marginal_precision(prior, data.dim)
    theta = state.theta
    logp = _log_posterior(theta, data, prior, model, prior_precision)
    for i in range(theta.size):
        if state.k < 100 or state.sq_dev[i] <= 0:
            sd = 1.0
        else:
            sd = np.sqrt(s / state.k * state.sq_dev[i])
        prop = theta.copy()
        prop[i] += sd * rng.standard_normal()
        logp_prop = _log_posterior(prop, data, prior, model, prior_precision)
        state.proposed += 1
        if np.log(rng.uniform()) < logp_prop - logp:
            theta = prop
            logp = logp_prop
            state.accepted += 1
    state.theta = theta
    state.record()
    return state


# ---------------------------------------------------------------------------
# Chain runners
# ---------------------------------------------------------------------------


def _run_simple(sweep, beta0, data, prior, config, rng, name):
    rng = rng if rng is not None else RngStream(config.seed)
    prec = _marginal_precision(prior, data.dim)
    beta = beta0
    p = beta.size
    out = np.empty((config.draws, p))
    start = time.perf_counter()
    for it in range(config.burnin + config.draws):
        beta = sweep(beta, data, prior, rng, prec)
        keep = it - config.burnin
        if keep >= 0:
            out[keep] = beta.ravel()
    meta = {"sampler": name, "seed": config.seed,
            "seconds": time.perf_counter() - start}
    names = None
    if name == "ps-mnl":
        names = [f"cat{k}_b{j}" for k in range(1, data.m + 1)
                 for j in range(data.dim)]
    return Draws(beta=out, gamma=np.zeros(config.draws),
                 delta=np.ones(config.draws), names=names or [], meta=meta)


def run_albert_chib(data: BinaryData, prior: Priors, config: McmcConfig,
                    rng: RngStream | None = None) -> Draws:
    return _run_simple(albert_chib_sweep, np.zeros(data.dim), data, prior,
                       config, rng, "albert-chib")


def run_ps_logit(data: BinaryData, prior: Priors, config: McmcConfig,
                 rng: RngStream | None = None) -> Draws:
    return _run_simple(ps_logit_sweep, np.zeros(data.dim), data, prior,
                       config, rng, "ps-logit")


def run_ps_mnl(data: MultinomialData, prior: Priors, config: McmcConfig,
               rng: RngStream | None = None) -> Draws:
    return _run_simple(ps_mnl_sweep, np.zeros((data.m, data.dim)), data, prior,
                       config, rng, "ps-mnl")


def run_amh(data, prior: Priors, config: McmcConfig, model: str | None = None,
            rng: RngStream | None = None, s: float = 5.66) -> Draws:
    rng = rng if rng is not None else RngStream(config.seed)
    if model is None:
        if isinstance(data, MultinomialData):
            model = "mnl"
        elif isinstance(data, BinomialData):
            model = "binomial"
        else:
            model = config.link
    p = data.dim * (data.m if model == "mnl" else 1)
    prec = _marginal_precision(prior, data.dim)
    state = AmhState(theta=np.zeros(p))
    out = np.empty((config.draws, p))
    start = time.perf_counter()
    for it in range(config.burnin + config.draws):
        state = amh_sweep(state, data, prior, model, rng, s, prec)
        keep = it - config.burnin
        if keep >= 0:
            out[keep] = state.theta
    meta = {"sampler": "amh", "model": model, "seed": config.seed,
            "accept_rate": state.accept_rate,
            "seconds": time.perf_counter() - start}
    return Draws(beta=out, gamma=np.zeros(config.draws),
                 delta=np.ones(config.draws), meta=meta)

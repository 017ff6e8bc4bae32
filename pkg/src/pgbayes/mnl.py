"""Gibbs sampler for multinomial logit regression via aggregated utilities.

Each non-baseline category k is updated from a three-utility reduction of
the full random-utility model: the utility of category k, of the baseline,
and the maximum utility over all remaining categories.  The triple has a
closed-form joint posterior built from exponential races, after which the
category block reduces to a binary logit update with Polya-Gamma mixing and
per-category boosting, exactly as in :mod:`pgbayes.binary`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .binary import (
    effective_prior_precision,
    sample_delta,
    sample_gamma,
    sample_working_star,
)
from .dist import invgamma_sample, pg_sample_many
from .errors import ConstraintError
from .linalg import mvn_sample, posterior_moments
from .model import Draws, McmcConfig, MultinomialData, Priors
from .rng import RngStream

__all__ = ["MnlState", "sample_utility_triples", "mnl_category_sweep",
           "upg_mnl_sweep", "run_chain"]


@dataclass
class MnlState:
    beta: np.ndarray        # (m, d) category coefficients, baseline excluded
    gamma: np.ndarray       # (m,) last threshold draw per category
    delta: np.ndarray       # (m,) last scale draw per category


def sample_utility_triples(lam_k, lam_a, winner, rng: RngStream):
    """Posterior draw of the utility triple (u_k, u_0, u_A) per observation.

    ``winner`` codes the observed class per row: 0 for category k, 1 for the
    baseline, 2 for the aggregated rest.  ``lam_a`` is the summed scale of
    the aggregated category; pass ``None`` when there are no other
    categories (binary case), in which case ``u_a`` is absent.

    The construction: minus the winner's exponentiated utility is a rate
    ``1 + lam_k + lam_a`` exponential shared by all three components, and
    each loser adds an independent exponential with its own scale.  The
    observed class therefore has the strictly largest utility on every draw,
    which is asserted.
    """
    lam_k = np.asarray(lam_k, dtype=float)
    n = lam_k.size
    has_a = lam_a is not None
    total = 1.0 + lam_k + (lam_a if has_a else 0.0)

    shared = rng.standard_exponential(n) / total
    e_k = shared + np.where(winner != 0, rng.standard_exponential(n) / lam_k, 0.0)
    e_0 = shared + np.where(winner != 1, rng.standard_exponential(n), 0.0)
    u_k = -np.log(e_k)
    u_0 = -np.log(e_0)
    if has_a:
        e_a = shared + np.where(winner != 2, rng.standard_exponential(n) / lam_a, 0.0)
        u_a = -np.log(e_a)
        stacked = np.stack([u_k, u_0, u_a])
    else:
        u_a = None
        stacked = np.stack([u_k, u_0])
    if np.any(np.argmax(stacked, axis=0) != winner):
        raise ConstraintError("observed category does not have maximal utility")
    return u_k, u_0, u_a


def _winner_codes(y: np.ndarray, k: int) -> np.ndarray:
    winner = np.full(y.shape, 2, dtype=np.int64)
    winner[y == k] = 0
    winner[y == 0] = 1
    return winner


def _threshold_bounds(u_k, u_0, u_a, winner):
    """Truncation interval for gamma_k implied by the boosted choice rules."""
    other_best = u_0 if u_a is None else np.maximum(u_0, u_a)
    is_k = winner == 0
    hi = float(np.min(u_k[is_k] - other_best[is_k])) if is_k.any() else np.inf
    lo = -np.inf
    if (winner == 1).any():
        lo = float(np.max(u_k[winner == 1] - u_0[winner == 1]))
    if u_a is not None and (winner == 2).any():
        lo = max(lo, float(np.max(u_k[winner == 2] - u_a[winner == 2])))
    if not lo < hi:
        raise ConstraintError(f"threshold bounds inverted: L={lo} >= O={hi}")
    return lo, hi


def mnl_category_sweep(k: int, state: MnlState, data: MultinomialData,
                       prior: Priors, config: McmcConfig, rng: RngStream,
                       prior_precision: np.ndarray | None = None) -> MnlState:
    """Update the block of category k (1-based) in place and return the state."""
    x, y = data.x, data.y
    if prior_precision is None:
        prior_precision = effective_prior_precision(prior, data.dim, config.boost)
    lam_all = np.exp(x @ state.beta.T)                    # (N, m)
    lam_k = lam_all[:, k - 1]
    lam_a = lam_all.sum(axis=1) - lam_k if data.m > 1 else None
    winner = _winner_codes(y, k)

    # (a-1) utility triple and mixing variables
    u_k, u_0, u_a = sample_utility_triples(lam_k, lam_a, winner, rng)
    omega = pg_sample_many(2, np.abs(u_k - u_0 - np.log(lam_k)), rng)

    # (a-2) category-specific boost; the baseline and aggregated utilities
    # are scaled but not shifted
    if config.boost == "full":
        delta_star, gamma_star = sample_working_star(
            float(state.beta[k - 1, -1]), prior.a0_dd(data.dim), prior, rng)
    elif config.boost == "scale":
        delta_star, gamma_star = float(invgamma_sample(prior.d0, prior.big_d0, rng)), 0.0
    else:
        delta_star, gamma_star = 1.0, 0.0
    root = np.sqrt(delta_star)
    ut_k = root * u_k + gamma_star
    ut_0 = root * u_0
    ut_a = root * u_a if u_a is not None else None

    # (b-1) threshold from its truncated prior, then the scale
    z_tilde = ut_k - ut_0
    moments = posterior_moments(x, z_tilde, omega, prior_precision)
    gamma_new = (sample_gamma(_threshold_bounds(ut_k, ut_0, ut_a, winner), prior, rng)
                 if config.boost == "full" else 0.0)
    if config.boost == "none":
        delta_new = 1.0
    else:
        delta_new = sample_delta(gamma_new, z_tilde, omega, x, moments, prior,
                                 prior_precision, rng,
                                 threshold=config.boost == "full")

    # (b-2) coefficients in the expanded model, mapped back
    beta_tilde = mvn_sample(moments.b, delta_new, moments.chol, rng)
    beta_k = beta_tilde / np.sqrt(delta_new)
    beta_k[-1] = (beta_tilde[-1] - gamma_new) / np.sqrt(delta_new)
    state.beta[k - 1] = beta_k
    state.gamma[k - 1] = gamma_new
    state.delta[k - 1] = delta_new
    return state


def upg_mnl_sweep(state: MnlState, data: MultinomialData, prior: Priors,
                  config: McmcConfig, rng: RngStream,
                  prior_precision: np.ndarray | None = None) -> MnlState:
    """One systematic-scan sweep over categories 1..m in ascending order."""
    if prior_precision is None:
        prior_precision = effective_prior_precision(prior, data.dim, config.boost)
    for k in range(1, data.m + 1):
        state = mnl_category_sweep(k, state, data, prior, config, rng,
                                   prior_precision)
    return state


def run_chain(data: MultinomialData, prior: Priors, config: McmcConfig,
              rng: RngStream | None = None) -> Draws:
    """Run the sampler; coefficient draws are stored category-major."""
    rng = rng if rng is not None else RngStream(config.seed)
    prec = effective_prior_precision(prior, data.dim, config.boost)
    m, d = data.m, data.dim
    state = MnlState(beta=np.zeros((m, d)), gamma=np.zeros(m), delta=np.ones(m))
    beta = np.empty((config.draws, m * d))
    gamma = np.empty((config.draws, m))
    delta = np.empty((config.draws, m))
    start = time.perf_counter()
    for it in range(config.burnin + config.draws):
        state = upg_mnl_sweep(state, data, prior, config, rng, prec)
        keep = it - config.burnin
        if keep >= 0:
            beta[keep] = state.beta.ravel()
            gamma[keep] = state.gamma
            delta[keep] = state.delta
    names = [f"cat{k}_b{j}" for k in range(1, m + 1) for j in range(d)]
    meta = {"sampler": "upg-mnl", "boost": config.boost, "seed": config.seed,
            "seconds": time.perf_counter() - start}
    return Draws(beta=beta, gamma=gamma, delta=delta, names=names, meta=meta)

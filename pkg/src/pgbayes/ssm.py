"""Boosted Gibbs sampler for binary state-space (time-varying coefficient) models.

The observation equation is a binary probit/logit with random-walk
coefficients.  Conditional on utilities and PG variables the model is linear
Gaussian with every covariance scaled by one unknown factor, so a single
Kalman pass run at scale one yields (i) the integrated likelihood needed to
draw the scale with states marginalized out and (ii) the moments reused by
forward-filtering backward-sampling after only multiplying covariances by
the sampled scale.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .binary import sample_gamma, sample_utilities, sample_working_star
from .dist import invgamma_sample, pg_sample_many
from .errors import ConstraintError, PgbayesError
from .model import Draws, McmcConfig, Priors, TimeSeriesData
from .rng import RngStream

__all__ = [
    "SsmState",
    "FilterCache",
    "scaled_kalman_filter",
    "sample_delta_ssm",
    "ffbs",
    "sample_init_and_theta",
    "upg_ssm_sweep",
    "run_chain",
]

_THETA_FLOOR = 1e-12


@dataclass
class SsmState:
    path: np.ndarray         # (T+1, d) identified-model state path, row 0 = pre-sample
    init_mean: np.ndarray    # (d,) expected initial values
    theta: np.ndarray        # (d,) process variances
    gamma: float = 0.0
    delta: float = 1.0


@dataclass(frozen=True)
class FilterCache:
    """Kalman pass at scale one; all scale dependence re-enters multiplicatively."""

    zhat: np.ndarray         # (T,) one-step predicted observation means
    s: np.ndarray            # (T,) predictive variances
    xf: np.ndarray           # (T+1, d) filtered state means, row 0 = prior mean
    pf: np.ndarray           # (T+1, d, d) filtered covariances
    ppred: np.ndarray        # (T, d, d) propagated covariances P_{t+1|t}
    ssq: float               # sum of (z_t - zhat_t)^2 / s_t

    @property
    def t(self) -> int:
        return self.zhat.size


@njit(cache=True)
def _kalman(z, obs_var, x, theta, p0_diag):
    t_len, d = x.shape
    xf = np.zeros((t_len + 1, d))
    pf = np.zeros((t_len + 1, d, d))
    ppred = np.zeros((t_len, d, d))
    zhat = np.zeros(t_len)
    s = np.zeros(t_len)
    for j in range(d):
        pf[0, j, j] = p0_diag[j]
    if d == 1:
        p = p0_diag[0]
        m = 0.0
        for t in range(t_len):
            pp = p + theta[0]
            xr = x[t, 0]
            zh = xr * m
            sv = xr * pp * xr + obs_var[t]
            k = pp * xr / sv
            m = m + k * (z[t] - zh)
            p = pp - k * xr * pp
            xf[t + 1, 0] = m
            pf[t + 1, 0, 0] = p
            ppred[t, 0, 0] = pp
            zhat[t] = zh
            s[t] = sv
        return zhat, s, xf, pf, ppred
    for t in range(t_len):
        pp = pf[t].copy()
        for j in range(d):
            pp[j, j] += theta[j]
        xr = x[t]
        zh = 0.0
        for j in range(d):
            zh += xr[j] * xf[t, j]
        px = pp @ xr
        sv = obs_var[t]
        for j in range(d):
            sv += xr[j] * px[j]
        k = px / sv
        xf[t + 1] = xf[t] + k * (z[t] - zh)
        pf[t + 1] = pp - np.outer(k, px)
        pf[t + 1] = 0.5 * (pf[t + 1] + pf[t + 1].T)
        ppred[t] = pp
        zhat[t] = zh
        s[t] = sv
    return zhat, s, xf, pf, ppred


@njit(cache=True)
def _ffbs(xf, pf, ppred, delta, normals):
    t1, d = xf.shape
    path = np.zeros((t1, d))
    if d == 1:
        var = delta * pf[t1 - 1, 0, 0]
        path[t1 - 1, 0] = xf[t1 - 1, 0] + np.sqrt(max(var, 0.0)) * normals[t1 - 1, 0]
        for t in range(t1 - 2, -1, -1):
            g = pf[t, 0, 0] / ppred[t, 0, 0]
            mean = xf[t, 0] + g * (path[t + 1, 0] - xf[t, 0])
            var = delta * (pf[t, 0, 0] - g * g * ppred[t, 0, 0])
            path[t, 0] = mean + np.sqrt(max(var, 0.0)) * normals[t, 0]
        return path
    chol = np.linalg.cholesky(delta * pf[t1 - 1])
    path[t1 - 1] = xf[t1 - 1] + chol @ normals[t1 - 1]
    for t in range(t1 - 2, -1, -1):
        g = np.linalg.solve(ppred[t], pf[t]).T
        mean = xf[t] + g @ (path[t + 1] - xf[t])
        cov = delta * (pf[t] - g @ ppred[t] @ g.T)
        cov = 0.5 * (cov + cov.T)
        jitter = 1e-13 * max(np.trace(cov) / d, 1e-300)
        for j in range(d):
            cov[j, j] += jitter
        chol = np.linalg.cholesky(cov)
        path[t] = mean + chol @ normals[t]
    return path


def scaled_kalman_filter(z_tilde, omega, x, theta, prior: Priors,
                         a0_diag: np.ndarray | None = None) -> FilterCache:
    """Kalman pass at scale one under the marginalized initial-state prior.

    Observation variances are 1/omega (ones for probit).  The initial-state
    covariance is diag(a0 + theta * p_init), the marginal prior with the
    expected initial values integrated out.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    d = x.shape[1]
    theta = np.asarray(theta, dtype=float)
    if a0_diag is None:
        a0_diag = np.diag(prior.a0_matrix(d))
    p0 = np.asarray(a0_diag, dtype=float) + theta * prior.p_init_diag(d)
    obs_var = 1.0 / np.asarray(omega, dtype=float)
    z_tilde = np.ascontiguousarray(z_tilde, dtype=np.float64)
    zhat, s, xf, pf, ppred = _kalman(
        z_tilde,
        np.ascontiguousarray(obs_var),
        np.ascontiguousarray(x),
        np.ascontiguousarray(theta),
        np.ascontiguousarray(p0),
    )
    if not np.all(s > 0):
        raise PgbayesError("non-positive predictive variance in the Kalman pass")
    ssq = float(np.sum((z_tilde - zhat) ** 2 / s))
    return FilterCache(zhat=zhat, s=s, xf=xf, pf=pf, ppred=ppred, ssq=ssq)


def sample_delta_ssm(gamma: float, cache: FilterCache, prior: Priors,
                     rng: RngStream, threshold: bool = True) -> float:
    """Scale draw with the state path integrated out analytically."""
    shape = prior.d0 + 0.5 * cache.t + (0.5 if threshold else 0.0)
    rate = prior.big_d0 + 0.5 * cache.ssq
    if threshold:
        rate += gamma ** 2 / (2.0 * prior.g0)
    return float(invgamma_sample(shape, rate, rng))


def ffbs(cache: FilterCache, delta: float, rng: RngStream) -> np.ndarray:
    """Joint draw of the state path from its smoothing distribution at scale delta."""
    normals = rng.standard_normal(cache.xf.shape)
    return _ffbs(cache.xf, cache.pf, cache.ppred, float(delta), normals)


def sample_init_and_theta(path, theta, delta: float, prior: Priors,
                          rng: RngStream, a0_diag: np.ndarray | None = None):
    """Conjugate updates of the expected initial values and process variances.

    First each expected initial value is drawn given the sampled pre-sample
    state and the current process variance, then each process variance is
    drawn from its inverse gamma conditional given the full path.
    """
    path = np.asarray(path, dtype=float)
    t_len, d = path.shape[0] - 1, path.shape[1]
    if a0_diag is None:
        a0_diag = np.diag(prior.a0_matrix(d))
    p_init = prior.p_init_diag(d)
    increments_sq = np.sum(np.diff(path, axis=0) ** 2, axis=0)
    init = np.empty(d)
    theta_new = np.empty(d)
    for j in range(d):
        denom = a0_diag[j] + theta[j] * p_init[j]
        mean = a0_diag[j] * path[0, j] / denom
        var = delta * a0_diag[j] * theta[j] * p_init[j] / denom
        init[j] = mean + np.sqrt(var) * rng.standard_normal()
        rate = prior.big_c0 + ((path[0, j] - init[j]) ** 2 / p_init[j]
                               + increments_sq[j]) / (2.0 * delta)
        theta_new[j] = max(float(invgamma_sample(prior.c0 + 0.5 * (t_len + 1),
                                                 rate, rng)), _THETA_FLOOR)
    return init, theta_new


def _a0_diag(prior: Priors, d: int, boost: str) -> np.ndarray:
    """Initial-value prior variances; non-full modes fold G0 into the intercept."""
    diag = np.diag(prior.a0_matrix(d)).copy()
    if boost != "full":
        diag[-1] += prior.g0
    return diag


def upg_ssm_sweep(state: SsmState, data: TimeSeriesData, prior: Priors,
                  config: McmcConfig, rng: RngStream,
                  a0_diag: np.ndarray | None = None) -> SsmState:
    """One full Gibbs sweep; returns the updated state."""
    x, y = data.x, data.y
    d = data.dim
    if a0_diag is None:
        a0_diag = _a0_diag(prior, d, config.boost)

    # (a-1) utilities and mixing variables along the current path
    eta = np.sum(x * state.path[1:], axis=1)
    z = sample_utilities(eta, y, config.link, rng)
    if config.link == "logit":
        omega = pg_sample_many(2, np.abs(z - eta), rng)
    else:
        omega = np.ones(data.t)

    # (a-2) boost the utilities
    if config.boost == "full":
        delta_star, gamma_star = sample_working_star(
            float(state.init_mean[-1]), prior.a0_dd(d), prior, rng)
    elif config.boost == "scale":
        delta_star, gamma_star = float(invgamma_sample(prior.d0, prior.big_d0, rng)), 0.0
    else:
        delta_star, gamma_star = 1.0, 0.0
    z_tilde = np.sqrt(delta_star) * z + gamma_star

    # (b-1) threshold from its truncated prior
    if config.boost == "full":
        zeros = z_tilde[y == 0]
        ones = z_tilde[y == 1]
        lo = float(zeros.max()) if zeros.size else -np.inf
        hi = float(ones.min()) if ones.size else np.inf
        if not lo < hi:
            raise ConstraintError(f"threshold bounds inverted: L={lo} >= O={hi}")
        gamma_new = sample_gamma((lo, hi), prior, rng)
    else:
        gamma_new = 0.0

    # (b-2) scale with states marginalized out, then the path by FFBS
    cache = scaled_kalman_filter(z_tilde, omega, x, state.theta, prior, a0_diag)
    if config.boost == "none":
        delta_new = 1.0
    else:
        delta_new = sample_delta_ssm(gamma_new, cache, prior, rng,
                                     threshold=config.boost == "full")
    path_tilde = ffbs(cache, delta_new, rng)

    # (b-3) expected initial values and process variances
    init_tilde, theta_new = sample_init_and_theta(path_tilde, state.theta,
                                                  delta_new, prior, rng, a0_diag)

    # (b-4) back to the identified model
    sqrt_delta = np.sqrt(delta_new)
    path = path_tilde / sqrt_delta
    path[:, -1] = (path_tilde[:, -1] - gamma_new) / sqrt_delta
    init = init_tilde / sqrt_delta
    init[-1] = (init_tilde[-1] - gamma_new) / sqrt_delta

    z_new = (z_tilde - gamma_new) / sqrt_delta
    if np.any((z_new > 0) != (y == 1)):
        raise ConstraintError("utility signs inconsistent with outcomes after sweep")
    return SsmState(path=path, init_mean=init, theta=theta_new,
                    gamma=gamma_new, delta=delta_new)


def run_chain(data: TimeSeriesData, prior: Priors, config: McmcConfig,
              rng: RngStream | None = None) -> Draws:
    """Run the sampler; stored columns are the state path, then initial means,
    then process variances."""
    rng = rng if rng is not None else RngStream(config.seed)
    t_len, d = data.t, data.dim
    a0_diag = _a0_diag(prior, d, config.boost)
    state = SsmState(path=np.zeros((t_len + 1, d)), init_mean=np.zeros(d),
                     theta=np.ones(d))
    p = (t_len + 1) * d + 2 * d
    beta = np.empty((config.draws, p))
    gamma = np.empty(config.draws)
    delta = np.empty(config.draws)
    start = time.perf_counter()
    for it in range(config.burnin + config.draws):
        state = upg_ssm_sweep(state, data, prior, config, rng, a0_diag)
        keep = it - config.burnin
        if keep >= 0:
            beta[keep, : (t_len + 1) * d] = state.path.ravel()
            beta[keep, (t_len + 1) * d: (t_len + 1) * d + d] = state.init_mean
            beta[keep, (t_len + 1) * d + d:] = state.theta
            gamma[keep] = state.gamma
            delta[keep] = state.delta
    names = [f"state_t{t}_b{j}" for t in range(t_len + 1) for j in range(d)]
    names += [f"init_b{j}" for j in range(d)] + [f"theta_b{j}" for j in range(d)]
    meta = {"sampler": f"upg-ssm-{config.link}", "boost": config.boost,
            "seed": config.seed, "seconds": time.perf_counter() - start}
    return Draws(beta=beta, gamma=gamma, delta=delta, names=names, meta=meta)

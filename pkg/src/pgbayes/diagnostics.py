"""MCMC efficiency diagnostics and the joint-distribution validation harness.

The inefficiency factor is the chain's spectral density at frequency zero
divided by its variance, estimated by fitting an autoregressive process
(Yule-Walker, AIC order selection); the effective sample size is the number
of draws divided by the inefficiency factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from scipy.special import expit, ndtr

from . import binary, binomial, mnl, ssm
from .dist import invgamma_sample
from .errors import DegenerateChainError
from .model import (
    BinaryData,
    BinomialData,
    McmcConfig,
    MultinomialData,
    Priors,
    TimeSeriesData,
)
from .rng import RngStream

__all__ = ["spectrum0_ar", "ChainStats", "inefficiency", "acf",
           "GewekeReport", "geweke_joint_test"]


def acf(chain: np.ndarray, max_lag: int = 50) -> np.ndarray:
    """Sample autocorrelations at lags 0..max_lag (biased normalization)."""
    x = np.asarray(chain, dtype=float)
    x = x - x.mean()
    n = x.size
    max_lag = min(max_lag, n - 1)
    denom = x @ x
    if denom == 0:
        raise DegenerateChainError("chain has zero variance")
    return np.array([1.0] + [x[: n - k] @ x[k:] / denom for k in range(1, max_lag + 1)])


def _levinson(autocov: np.ndarray):
    """Levinson-Durbin recursion: AR coefficients and prediction variance per order."""
    pmax = autocov.size - 1
    phi_prev = np.zeros(0)
    var = autocov[0]
    variances = [var]
    phis = [phi_prev]
    for p in range(1, pmax + 1):
        num = autocov[p] - phi_prev @ autocov[p - 1:0:-1]
        k = num / var
        phi = np.concatenate([phi_prev - k * phi_prev[::-1], [k]])
        var = var * (1.0 - k * k)
        if not var > 0:
            break
        variances.append(var)
        phis.append(phi)
        phi_prev = phi
    return phis, np.array(variances)


def spectrum0_ar(chain: np.ndarray) -> float:
    """Spectral density of the chain at frequency zero via an AR fit.

    Yule-Walker estimation with the order chosen by AIC up to
    floor(10 log10 M); S(0) = sigma^2 / (1 - sum(phi))^2.
    """
    x = np.asarray(chain, dtype=float)
    n = x.size
    if n < 50:
        raise ValueError("need at least 50 draws for a spectral estimate")
    if np.var(x) == 0:
        raise DegenerateChainError("chain has zero variance")
    order_max = min(int(np.floor(10.0 * np.log10(n))), n - 1)
    xc = x - x.mean()
    autocov = np.array([xc[: n - k] @ xc[k:] for k in range(order_max + 1)]) / n
    phis, variances = _levinson(autocov)
    orders = np.arange(variances.size)
    aic = n * np.log(variances) + 2.0 * orders
    best = int(np.argmin(aic))
    phi = phis[best]
    # degrees-of-freedom correction of the innovation variance, as in the
    # classic AR-based spectral estimators
    var_pred = variances[best] * n / (n - best - 1)
    return float(var_pred / (1.0 - phi.sum()) ** 2)


@dataclass(frozen=True)
class ChainStats:
    """Posterior summary and efficiency metrics of one scalar chain."""

    mean: float
    sd: float
    q05: float
    q50: float
    q95: float
    if_factor: float
    ess: float
    acf: np.ndarray

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "q05": self.q05,
                "q50": self.q50, "q95": self.q95, "if": self.if_factor,
                "ess": self.ess}


def inefficiency(chain: np.ndarray, max_lag: int = 50) -> ChainStats:
    """Full per-chain report: IF = S(0)/var, ESS = M/IF, moments, quantiles."""
    x = np.asarray(chain, dtype=float)
    var = float(np.var(x))
    if var == 0:
        raise DegenerateChainError("chain has zero variance")
    if_factor = spectrum0_ar(x) / var
    q05, q50, q95 = np.quantile(x, [0.05, 0.50, 0.95])
    return ChainStats(mean=float(x.mean()), sd=float(x.std(ddof=1)),
                      q05=float(q05), q50=float(q50), q95=float(q95),
                      if_factor=if_factor, ess=x.size / if_factor,
                      acf=acf(x, max_lag))


def mc_stderr(chain: np.ndarray) -> float:
    """Monte-Carlo standard error of the chain mean, IF-adjusted."""
    stats = inefficiency(chain)
    return stats.sd * np.sqrt(stats.if_factor / chain.size)


# ---------------------------------------------------------------------------
# Joint-distribution ("simulate then sweep") validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GewekeReport:
    names: list[str]
    pvalues: np.ndarray
    alpha: float
    passed: bool
    cycles: int
    kept: int

    def __str__(self) -> str:
        lines = [f"joint-distribution test: cycles={self.cycles} kept={self.kept} "
                 f"threshold={self.alpha / len(self.names):.2e}"]
        for name, p in zip(self.names, self.pvalues):
            lines.append(f"  {name:>12s}  KS p = {p:.4f}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _prior_marginals(prior: Priors, d: int, label: str):
    """(name, cdf) pairs for the identified-model coefficient prior."""
    cov = prior.marginal_cov(d)
    out = []
    for j in range(d):
        sd = np.sqrt(cov[j, j])
        out.append((f"{label}b{j}", lambda q, s=sd: sps.norm.cdf(q, scale=s)))
    return out


def geweke_joint_test(model: str, prior: Priors, n: int, cycles: int,
                      rng: RngStream, *, d: int = 2, m: int = 2, trials: int = 5,
                      thin: int = 10, alpha: float = 0.01) -> GewekeReport:
    """Successive-conditional simulator test of a boosted sampler.

    Alternates data simulation given the current parameters with one
    posterior sweep, then compares the retained parameter marginals (plus
    the working-parameter draws, whose stationary laws are the Student-t and
    inverse-gamma priors) against their analytic priors by KS test with a
    Bonferroni-corrected threshold.
    """
    config = McmcConfig(draws=1, burnin=0, boost="full",
                        link="probit" if "probit" in model else "logit")
    margins: list[tuple[str, object]] = []
    rows: list[np.ndarray] = []

    if model in ("logit", "probit"):
        x = np.ones((n, d))
        if d > 1:
            x[:, : d - 1] = rng.standard_normal((n, d - 1))
        chol = np.linalg.cholesky(prior.marginal_cov(d))
        beta = chol @ rng.standard_normal(d)
        margins += _prior_marginals(prior, d, "")
        prec = binary.effective_prior_precision(prior, d, "full")
        link_cdf = expit if model == "logit" else ndtr
        for _ in range(cycles):
            y = (rng.uniform(size=n) < link_cdf(x @ beta)).astype(np.int64)
            data = BinaryData(x=x, y=y)
            state = binary.BinaryState(beta=beta, z=np.zeros(n), omega=np.ones(n))
            state = binary.upg_binary_sweep(state, data, prior, config, rng, prec)
            beta = state.beta
            rows.append(np.concatenate([beta, [state.gamma, state.delta]]))

    elif model == "mnl":
        x = np.ones((n, d))
        if d > 1:
            x[:, : d - 1] = rng.standard_normal((n, d - 1))
        chol = np.linalg.cholesky(prior.marginal_cov(d))
        bmat = (chol @ rng.standard_normal((d, m))).T
        for k in range(1, m + 1):
            margins += _prior_marginals(prior, d, f"cat{k}_")
        prec = binary.effective_prior_precision(prior, d, "full")
        state = mnl.MnlState(beta=bmat, gamma=np.zeros(m), delta=np.ones(m))
        for _ in range(cycles):
            util = np.concatenate([np.zeros((n, 1)), x @ state.beta.T], axis=1)
            prob = np.exp(util - np.logaddexp.reduce(util, axis=1, keepdims=True))
            u = rng.uniform(size=n)
            y = (u[:, None] >= np.cumsum(prob, axis=1)).sum(axis=1).astype(np.int64)
            data = MultinomialData(x=x, y=y, m=m)
            state = mnl.upg_mnl_sweep(state, data, prior, config, rng, prec)
            rows.append(np.concatenate([state.beta.ravel(),
                                        [state.gamma[0], state.delta[0]]]))

    elif model == "binomial":
        x = np.ones((n, d))
        if d > 1:
            x[:, : d - 1] = rng.standard_normal((n, d - 1))
        ni = np.full(n, trials, dtype=np.int64)
        chol = np.linalg.cholesky(prior.marginal_cov(d))
        beta = chol @ rng.standard_normal(d)
        margins += _prior_marginals(prior, d, "")
        prec = binary.effective_prior_precision(prior, d, "full")
        for _ in range(cycles):
            y = rng.binomial(ni, expit(x @ beta)).astype(np.int64)
            data = BinomialData(x=x, y=y, trials=ni)
            state = binomial.BinomialState(beta=beta)
            state = binomial.upg_binomial_sweep(state, data, prior, config, rng, prec)
            beta = state.beta
            rows.append(np.concatenate([beta, [state.gamma, state.delta]]))

    elif model in ("ssm-logit", "ssm-probit"):
        t_len = n
        x = np.ones((t_len, d))
        if d > 1:
            x[:, : d - 1] = rng.standard_normal((t_len, d - 1))
        a0_diag = ssm._a0_diag(prior, d, "full")
        marg_sd = np.sqrt(np.diag(prior.marginal_cov(d)))
        init = marg_sd * rng.standard_normal(d)
        theta = np.asarray(invgamma_sample(prior.c0, prior.big_c0, rng, size=d))
        margins += _prior_marginals(prior, d, "init_")
        for j in range(d):
            margins.append((f"theta{j}", lambda q, a=prior.c0, s=prior.big_c0:
                            sps.invgamma.cdf(q, a, scale=s)))
        p_init = prior.p_init_diag(d)
        path = np.empty((t_len + 1, d))
        path[0] = init + np.sqrt(theta * p_init) * rng.standard_normal(d)
        steps = np.sqrt(theta) * rng.standard_normal((t_len, d))
        path[1:] = path[0] + np.cumsum(steps, axis=0)
        state = ssm.SsmState(path=path, init_mean=init, theta=theta)
        link_cdf = expit if model.endswith("logit") else ndtr
        for _ in range(cycles):
            eta = np.sum(x * state.path[1:], axis=1)
            y = (rng.uniform(size=t_len) < link_cdf(eta)).astype(np.int64)
            data = TimeSeriesData(x=x, y=y)
            state = ssm.upg_ssm_sweep(state, data, prior, config, rng, a0_diag)
            rows.append(np.concatenate([state.init_mean, state.theta,
                                        [state.gamma, state.delta]]))

    else:
        raise ValueError(f"unknown model {model!r}")

    margins.append(("gamma", lambda q: sps.t.cdf(
        q, 2.0 * prior.d0, scale=np.sqrt(prior.g0_star))))
    margins.append(("delta", lambda q: sps.invgamma.cdf(
        q, prior.d0, scale=prior.big_d0)))

    draws = np.asarray(rows)[::thin]
    pvals = np.array([sps.kstest(draws[:, i], cdf).pvalue
                      for i, (_, cdf) in enumerate(margins)])
    names = [name for name, _ in margins]
    threshold = alpha / len(names)
    return GewekeReport(names=names, pvalues=pvals, alpha=alpha,
                        passed=bool(np.all(pvals > threshold)),
                        cycles=cycles, kept=draws.shape[0])

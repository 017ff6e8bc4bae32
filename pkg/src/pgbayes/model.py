"""Datasets, priors, sampler configuration, draw storage and likelihoods.

Design matrices follow one convention throughout the package: the *last*
column is the intercept and is identically one.  The CLI appends it
automatically; library users must provide it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, gammaln, log_ndtr, ndtr
from scipy.special import log_expit as _log_expit

from .errors import InputError
from .rng import RngStream

__all__ = [
    "BinaryData",
    "MultinomialData",
    "BinomialData",
    "TimeSeriesData",
    "Priors",
    "McmcConfig",
    "Draws",
    "loglik_binary",
    "loglik_mnl",
    "loglik_binomial",
    "simulate_dataset",
]


def _check_design(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InputError(f"design matrix must be 2-d with N >= 1, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("design matrix contains non-finite values")
    if not np.allclose(x[:, -1], 1.0):
        raise InputError("last design column must be the intercept (all ones)")
    return x


@dataclass(frozen=True)
class BinaryData:
    """Binary outcomes y in {0,1} with design matrix X (intercept last)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _check_design(self.x))
        y = np.asarray(self.y, dtype=np.int64)
        if y.shape != (self.x.shape[0],):
            raise InputError("y must be a vector matching the design rows")
        if not np.isin(y, (0, 1)).all():
            raise InputError("binary outcomes must be 0 or 1")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class MultinomialData:
    """Categorical outcomes y in {0, ..., m}; category 0 is the baseline."""

    x: np.ndarray
    y: np.ndarray
    m: int

    def __post_init__(self):
        object.__setattr__(self, "x", _check_design(self.x))
        y = np.asarray(self.y, dtype=np.int64)
        if y.shape != (self.x.shape[0],):
            raise InputError("y must be a vector matching the design rows")
        if self.m < 1:
            raise InputError("need at least one non-baseline category")
        if y.min() < 0 or y.max() > self.m:
            bad = int(np.argmax((y < 0) | (y > self.m)))
            raise InputError(f"label out of range [0, {self.m}] at row {bad}")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class BinomialData:
    """Counts y[i] out of trials[i] with a shared logit regression."""

    x: np.ndarray
    y: np.ndarray
    trials: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _check_design(self.x))
        y = np.asarray(self.y, dtype=np.int64)
        trials = np.asarray(self.trials, dtype=np.int64)
        if y.shape != (self.x.shape[0],) or trials.shape != y.shape:
            raise InputError("y and trials must be vectors matching the design rows")
        if trials.min() < 1:
            bad = int(np.argmax(trials < 1))
            raise InputError(f"trial count must be >= 1 at row {bad}")
        if np.any(y < 0) or np.any(y > trials):
            bad = int(np.argmax((y < 0) | (y > trials)))
            raise InputError(f"count outside [0, trials] at row {bad}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "trials", trials)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


class TimeSeriesData(BinaryData):
    """Time-ordered binary outcomes for state-space models."""

    @property
    def t(self) -> int:
        return self.n


@dataclass(frozen=True)
class Priors:
    """Hyperparameters shared by all samplers.

    ``a0`` is the coefficient prior scale in the expanded model: a scalar
    (diagonal), a vector of diagonal entries, or a full SPD matrix.  The
    threshold/scale working parameters use ``(g0, d0, big_d0)``; the
    state-space process variances use ``(c0, big_c0, p_init)``.

    The intercept's *effective* prior variance in the identified model is
    ``a0[d,d] + g0`` (the threshold absorbs into the intercept), so samplers
    compared against this package must use N(0, A0 + G0 e_d e_d') as the
    coefficient prior.
    """

    a0: float | np.ndarray = 100.0
    g0: float = 100.0
    d0: float = 2.5
    big_d0: float = 2.5
    c0: float = 2.5
    big_c0: float = 1.5
    p_init: float | np.ndarray = 1.0

    def __post_init__(self):
        for name in ("g0", "d0", "big_d0", "c0", "big_c0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def g0_star(self) -> float:
        return self.g0 * self.big_d0 / self.d0

    def a0_matrix(self, d: int) -> np.ndarray:
        a0 = np.asarray(self.a0, dtype=float)
        if a0.ndim == 0:
            return float(a0) * np.eye(d)
        if a0.ndim == 1:
            if a0.size != d:
                raise ValueError(f"a0 diagonal has length {a0.size}, expected {d}")
            return np.diag(a0)
        if a0.shape != (d, d):
            raise ValueError(f"a0 has shape {a0.shape}, expected ({d}, {d})")
        return a0.copy()

    def a0_dd(self, d: int) -> float:
        return float(self.a0_matrix(d)[d - 1, d - 1])

    def marginal_cov(self, d: int) -> np.ndarray:
        """Coefficient prior covariance in the identified model."""
        cov = self.a0_matrix(d)
        cov[d - 1, d - 1] += self.g0
        return cov

    def p_init_diag(self, d: int) -> np.ndarray:
        p = np.asarray(self.p_init, dtype=float)
        if p.ndim == 0:
            return np.full(d, float(p))
        if p.size != d:
            raise ValueError(f"p_init has length {p.size}, expected {d}")
        return p.astype(float)


BOOST_MODES = ("full", "scale", "none")


@dataclass(frozen=True)
class McmcConfig:
    """Chain length, seed, link and boosting mode.

    ``boost='full'`` samples both working parameters, ``'scale'`` fixes the
    threshold at zero (scale-only marginal augmentation), ``'none'`` fixes
    threshold 0 / scale 1 (plain data augmentation).
    """

    draws: int = 10_000
    burnin: int = 2_000
    seed: int = 0
    boost: str = "full"
    link: str = "logit"

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError("draws must be >= 1")
        if self.burnin < 0:
            raise ValueError("burnin must be >= 0")
        if self.boost not in BOOST_MODES:
            raise ValueError(f"boost must be one of {BOOST_MODES}")
        if self.link not in ("logit", "probit"):
            raise ValueError("link must be 'logit' or 'probit'")


@dataclass
class Draws:
    """Post-burn-in draws: coefficients plus working-parameter trajectories."""

    beta: np.ndarray                       # (draws, p)
    gamma: np.ndarray                      # (draws,) or (draws, m)
    delta: np.ndarray                      # (draws,) or (draws, m)
    names: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.beta.ndim != 2:
            raise ValueError("beta draws must be a 2-d array")
        if not self.names:
            self.names = [f"b{j}" for j in range(self.beta.shape[1])]
        if len(self.names) != self.beta.shape[1]:
            raise ValueError("one name per stored column is required")

    @property
    def n_draws(self) -> int:
        return self.beta.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.beta[:, self.names.index(name)]


# ---------------------------------------------------------------------------
# Exact log-likelihoods (used by the MH baseline and quadrature oracles)
# ---------------------------------------------------------------------------


def loglik_binary(beta: np.ndarray, data: BinaryData, link: str = "logit") -> float:
    eta = data.x @ np.asarray(beta, dtype=float)
    if link == "logit":
        return float(np.sum(data.y * _log_expit(eta) + (1 - data.y) * _log_expit(-eta)))
    if link == "probit":
        return float(np.sum(data.y * log_ndtr(eta) + (1 - data.y) * log_ndtr(-eta)))
    raise ValueError("link must be 'logit' or 'probit'")


def loglik_mnl(beta: np.ndarray, data: MultinomialData) -> float:
    """Log-likelihood of the multinomial logit; beta has shape (m, d)."""
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    if beta.shape != (data.m, data.dim):
        raise ValueError(f"beta must have shape ({data.m}, {data.dim})")
    util = data.x @ beta.T                               # (N, m), baseline util 0
    padded = np.concatenate([np.zeros((data.n, 1)), util], axis=1)
    log_denom = np.logaddexp.reduce(padded, axis=1)
    chosen = padded[np.arange(data.n), data.y]
    return float(np.sum(chosen - log_denom))


def loglik_binomial(beta: np.ndarray, data: BinomialData) -> float:
    eta = data.x @ np.asarray(beta, dtype=float)
    binom = gammaln(data.trials + 1) - gammaln(data.y + 1) - gammaln(data.trials - data.y + 1)
    return float(np.sum(binom + data.y * _log_expit(eta)
                        + (data.trials - data.y) * _log_expit(-eta)))


# ---------------------------------------------------------------------------
# Data simulation
# ---------------------------------------------------------------------------


def _design(n: int, d: int, rng: RngStream) -> np.ndarray:
    x = np.ones((n, d))
    if d > 1:
        x[:, : d - 1] = rng.standard_normal((n, d - 1))
    return x


def _coefs(d: int, beta, intercept) -> np.ndarray:
    b = np.zeros(d) if beta is None else np.asarray(beta, dtype=float).copy()
    if b.shape != (d,):
        raise ValueError(f"beta must have length {d}")
    if intercept is not None:
        b[-1] = intercept
    return b


def simulate_dataset(model: str, n: int, rng: RngStream, *, d: int = 2,
                     beta=None, intercept=None, m: int = 2, trials: int = 1,
                     one_success: bool = False):
    """Simulate a dataset from one of the supported outcome models.

    ``model`` is one of ``'logit'``, ``'probit'``, ``'mnl'``, ``'binomial'``
    or ``'ssm-logit'``/``'ssm-probit'`` (which here produce static-coefficient
    series).  Covariates are iid standard normal; the last column is the
    intercept.  ``one_success`` plants exactly one success (for multinomial
    data: exactly one observation per non-baseline category) regardless of
    the linear predictor, the extreme-imbalance benchmark design.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if one_success and model in ("mnl",) and n < m:
        raise ValueError("one-success multinomial data needs n >= m")
    x = _design(n, d, rng)

    if model in ("logit", "probit", "ssm-logit", "ssm-probit"):
        b = _coefs(d, beta, intercept)
        eta = x @ b
        prob = expit(eta) if model.endswith("logit") else ndtr(eta)
        y = (rng.uniform(size=n) < prob).astype(np.int64)
        if one_success:
            y[:] = 0
            y[rng.integers(n)] = 1
        cls = TimeSeriesData if model.startswith("ssm") else BinaryData
        return cls(x=x, y=y)

    if model == "mnl":
        if beta is None:
            bmat = np.zeros((m, d))
            if intercept is not None:
                bmat[:, -1] = intercept
        else:
            bmat = np.asarray(beta, dtype=float).reshape(m, d)
        util = np.concatenate([np.zeros((n, 1)), x @ bmat.T], axis=1)
        prob = np.exp(util - np.logaddexp.reduce(util, axis=1, keepdims=True))
        u = rng.uniform(size=n)
        y = (u[:, None] >= np.cumsum(prob, axis=1)).sum(axis=1).astype(np.int64)
        if one_success:
            y[:] = 0
            picks = rng.choice(n, size=m, replace=False)
            for k in range(m):
                y[picks[k]] = k + 1
        return MultinomialData(x=x, y=y, m=m)

    if model == "binomial":
        b = _coefs(d, beta, intercept)
        prob = expit(x @ b)
        ni = np.full(n, int(trials), dtype=np.int64)
        y = rng.binomial(ni, prob).astype(np.int64)
        if one_success:
            y[:] = 0
            y[rng.integers(n)] = 1
        return BinomialData(x=x, y=y, trials=ni)

    raise ValueError(f"unknown model {model!r}")

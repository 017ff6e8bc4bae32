"""Polya-Gamma Gibbs samplers for discrete-outcome Bayesian regression.

Boosted samplers for binary (logit/probit), multinomial, binomial and binary
state-space models, the classic data-augmentation and adaptive-MH baselines
they are benchmarked against, and MCMC efficiency diagnostics.
"""

from . import baselines, binary, binomial, diagnostics, mnl, ssm
from .dist import GenLogistic, invgamma_sample, pg_sample, pg_sample_many
from .errors import (
    ConstraintError,
    DegenerateChainError,
    FactorizationError,
    InputError,
    PgbayesError,
)
from .model import (
    BinaryData,
    BinomialData,
    Draws,
    McmcConfig,
    MultinomialData,
    Priors,
    TimeSeriesData,
    loglik_binary,
    loglik_binomial,
    loglik_mnl,
    simulate_dataset,
)
from .rng import RngStream

__version__ = "0.1.0"

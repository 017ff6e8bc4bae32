"""Random-variate primitives and analytic distribution functions.

Contains the exact Polya-Gamma sampler (alternating-series accept/reject for
PG(1, c), convolution for integer shape b), the generalized logistic type
I/II family with closed-form cdf/quantile, truncated Student-t sampling by
cdf inversion, and inverse-gamma / sqrt-inverse-gamma variates.

All samplers are pure given the :class:`~pgbayes.rng.RngStream` that is
passed in; nothing touches global random state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gammaln, stdtr, stdtrit

from .errors import ConstraintError
from .rng import RngStream

__all__ = [
    "pg_sample",
    "pg_sample_many",
    "pg_mean",
    "GenLogistic",
    "trunc_student_sample",
    "invgamma_sample",
    "sqrt_invgamma_density",
    "sqrt_invgamma_sample",
]


# ---------------------------------------------------------------------------
# Polya-Gamma
# ---------------------------------------------------------------------------

# Truncation point of the alternating-series decomposition: below _TRUNC the
# inverse-Gaussian-type bound is used, above it the exponential-type bound.
_TRUNC = 0.64


@njit(cache=True)
def _norm_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@njit(cache=True)
def _series_coef(n, x):
    # n-th coefficient of the alternating series for the Jacobi-type density,
    # in the parametrization matched to the two proposal pieces.
    k = (n + 0.5) * math.pi
    if x > _TRUNC:
        return k * math.exp(-0.5 * k * k * x)
    return k * (2.0 / (math.pi * x)) ** 1.5 * math.exp(-2.0 * (n + 0.5) ** 2 / x)


@njit(cache=True)
def _mass_left_of_trunc(z, fz):
    # P(proposal falls in the exponential piece), i.e. p / (p + q).
    t = _TRUNC
    b = math.sqrt(1.0 / t) * (t * z - 1.0)
    a = -math.sqrt(1.0 / t) * (t * z + 1.0)
    x0 = math.log(fz) + fz * t
    xb = x0 - z + math.log(_norm_cdf(b))
    xa = x0 + z + math.log(_norm_cdf(a))
    qdivp = 4.0 / math.pi * (math.exp(xb) + math.exp(xa))
    return 1.0 / (1.0 + qdivp)


@njit(cache=True)
def _rand_trunc_invgauss(z, gen):
    # Inverse-Gaussian(mu=1/z, 1) restricted to (0, _TRUNC]; z may be 0.
    t = _TRUNC
    if t * z < 1.0:
        # mean above the truncation point: sample via the 1/chi^2-type tail
        while True:
            while True:
                e1 = gen.standard_exponential()
                e2 = gen.standard_exponential()
                if e1 * e1 <= 2.0 * e2 / t:
                    break
            x = t / ((1.0 + t * e1) ** 2)
            if gen.uniform(0.0, 1.0) <= math.exp(-0.5 * z * z * x):
                return x
    else:
        mu = 1.0 / z
        while True:
            y = gen.standard_normal() ** 2
            mu_y = mu * y
            x = mu + 0.5 * mu * mu_y - 0.5 * mu * math.sqrt(4.0 * mu_y + mu_y * mu_y)
            if gen.uniform(0.0, 1.0) > mu / (mu + x):
                x = mu * mu / x
            if x <= t:
                return x


@njit(cache=True)
def _pg1(c, gen):
    # Exact draw from PG(1, c) by alternating-series accept/reject.
    z = 0.5 * abs(c)
    fz = 0.125 * math.pi * math.pi + 0.5 * z * z
    while True:
        if gen.uniform(0.0, 1.0) < _mass_left_of_trunc(z, fz):
            x = _TRUNC + gen.standard_exponential() / fz
        else:
            x = _rand_trunc_invgauss(z, gen)
        s = _series_coef(0, x)
        y = gen.uniform(0.0, 1.0) * s
        n = 0
        while True:
            n += 1
            if n % 2 == 1:
                s -= _series_coef(n, x)
                if y <= s:
                    return 0.25 * x
            else:
                s += _series_coef(n, x)
                if y > s:
                    break


@njit(cache=True)
def _pg_many(b, c, gen):
    out = np.empty(b.shape[0])
    for i in range(b.shape[0]):
        acc = 0.0
        for _ in range(b[i]):
            acc += _pg1(c[i], gen)
        out[i] = acc
    return out


def pg_sample(b: int, c: float, rng: RngStream) -> float:
    """Draw from the Polya-Gamma distribution PG(b, c), integer b >= 1.

    A PG(b, c) variate is the sum of b independent PG(1, c) variates; each
    PG(1, c) comes from the exact alternating-series sampler.
    """
    if b < 1 or int(b) != b:
        raise ValueError(f"shape b must be a positive integer, got {b!r}")
    if not np.isfinite(c):
        raise ValueError(f"tilt c must be finite, got {c!r}")
    gen = rng.generator
    return float(sum(_pg1(float(c), gen) for _ in range(int(b))))


def pg_sample_many(b, c, rng: RngStream) -> np.ndarray:
    """Vectorized PG draws: ``out[i] ~ PG(b[i], c[i])``."""
    b = np.asarray(b, dtype=np.int64)
    c = np.asarray(c, dtype=np.float64)
    b, c = np.broadcast_arrays(b, c)
    if b.size and b.min() < 1:
        raise ValueError("all PG shapes must be >= 1")
    if not np.all(np.isfinite(c)):
        raise ValueError("all PG tilts must be finite")
    return _pg_many(np.ascontiguousarray(b), np.ascontiguousarray(c), rng.generator)


def pg_mean(b, c):
    """Analytic mean of PG(b, c): b/(2c) * tanh(c/2), with limit b/4 at c=0."""
    c = np.asarray(c, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(c == 0.0, b / 4.0, b / (2.0 * c) * np.tanh(c / 2.0))
    return m if m.ndim else float(m)


# ---------------------------------------------------------------------------
# Generalized logistic type I / II
# ---------------------------------------------------------------------------


def _softplus(x):
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class GenLogistic:
    """Generalized logistic distribution of type I or type II.

    Type I has density ``nu * exp(nu*x) / (1 + exp(x))**(nu+1)``, type II has
    ``nu * exp(x) / (1 + exp(x))**(nu+1)``. Both collapse to the standard
    logistic at ``nu = 1``.  Either type is a normal mixture
    ``N(kappa/omega, 1/omega)`` with ``omega ~ PG(nu+1, 0)`` and
    ``kappa = +/-(nu-1)/2`` (see :meth:`mixture_params`).
    """

    nu: float
    kind: str = "I"

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu!r}")
        if self.kind not in ("I", "II"):
            raise ValueError(f"kind must be 'I' or 'II', got {self.kind!r}")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        nu = self.nu
        tilt = nu * x if self.kind == "I" else x
        out = nu * np.exp(tilt - (nu + 1.0) * _softplus(x))
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "I":
            out = np.exp(-self.nu * _softplus(-x))
        else:
            out = -np.expm1(-self.nu * _softplus(x))
        return out if out.ndim else float(out)

    def ppf(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0.0) | (p >= 1.0)):
            raise ValueError("quantile argument must lie strictly in (0, 1)")
        if self.kind == "I":
            out = -np.log(np.expm1(-np.log(p) / self.nu))
        else:
            out = np.log(np.expm1(-np.log1p(-p) / self.nu))
        return out if out.ndim else float(out)

    def sample(self, rng: RngStream, size=None):
        u = rng.uniform(size=size)
        u = np.clip(u, 1e-300, 1.0 - 1e-16)
        return self.ppf(u)

    def mixture_params(self):
        """(b, kappa) of the PG normal-mixture representation."""
        if self.kind == "I":
            return self.nu + 1.0, (self.nu - 1.0) / 2.0
        return self.nu + 1.0, (1.0 - self.nu) / 2.0


# ---------------------------------------------------------------------------
# Truncated Student-t
# ---------------------------------------------------------------------------


def trunc_student_sample(df: float, scale: float, lower: float, upper: float,
                         rng: RngStream) -> float:
    """Draw from a Student-t(df, 0, scale^2) restricted to (lower, upper).

    Uses cdf inversion between the bounds.  Infinite bounds map to cdf values
    0/1.  Raises :class:`ConstraintError` if the bounds are inconsistent or
    the truncation window has vanishing probability mass.
    """
    if not (df > 0 and scale > 0):
        raise ValueError("df and scale must be positive")
    if not lower < upper:
        raise ConstraintError(f"empty truncation interval ({lower}, {upper})")
    f_lo = 0.0 if lower == -np.inf else stdtr(df, lower / scale)
    f_hi = 1.0 if upper == np.inf else stdtr(df, upper / scale)
    width = f_hi - f_lo
    if width < 1e-300:
        raise ConstraintError(
            f"truncation window ({lower}, {upper}) carries no probability mass"
        )
    u = f_lo + rng.uniform() * width
    x = scale * stdtrit(df, u)
    # keep the draw strictly inside the open interval
    if x <= lower:
        x = np.nextafter(lower, upper)
    elif x >= upper:
        x = np.nextafter(upper, lower)
    return float(x)


# ---------------------------------------------------------------------------
# Inverse gamma and sqrt-inverse-gamma
# ---------------------------------------------------------------------------


def invgamma_sample(shape: float, scale: float, rng: RngStream, size=None):
    """Draw from IG(shape, scale) with density ~ x^{-shape-1} exp(-scale/x)."""
    if not (shape > 0 and scale > 0):
        raise ValueError("shape and scale must be positive")
    g = rng.gamma(shape, 1.0, size=size)
    return scale / g


def sqrt_invgamma_density(delta, two_a: float, b: float):
    """Density at ``delta`` of the distribution of X^2 for X ~ IG(two_a, b).

    p(delta) = b^{two_a} / (2 Gamma(two_a)) * delta^{-(two_a/2 + 1)}
               * exp(-b / sqrt(delta)).
    """
    if not (two_a > 0 and b > 0):
        raise ValueError("parameters must be positive")
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise ValueError("delta must be positive")
    log_p = (
        two_a * np.log(b)
        - np.log(2.0)
        - gammaln(two_a)
        - (two_a / 2.0 + 1.0) * np.log(delta)
        - b / np.sqrt(delta)
    )
    out = np.exp(log_p)
    return out if out.ndim else float(out)


def sqrt_invgamma_sample(two_a: float, b: float, rng: RngStream, size=None):
    """Draw delta such that sqrt(delta) ~ IG(two_a, b)."""
    x = invgamma_sample(two_a, b, rng, size=size)
    return x * x

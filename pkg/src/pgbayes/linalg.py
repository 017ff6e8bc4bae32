"""Small dense linear algebra shared by all samplers.

Everything here is sized for regression problems with a handful of
coefficients, so plain LAPACK-backed numpy calls without pivoting are used.
A non-positive-definite matrix signals a data or prior bug and raises
:class:`FactorizationError`; nothing is silently regularized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import FactorizationError
from .rng import RngStream

__all__ = ["cholesky", "mvn_sample", "posterior_moments", "PosteriorMoments"]


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T = a.

    ``a`` must be symmetric (to 1e-12 relative) and positive definite.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise FactorizationError("matrix is not symmetric")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as err:
        raise FactorizationError(f"matrix is not positive definite: {err}") from err


def mvn_sample(mean: np.ndarray, scale: float, chol_cov: np.ndarray,
               rng: RngStream) -> np.ndarray:
    """Draw from N(mean, scale * chol_cov @ chol_cov.T)."""
    mean = np.asarray(mean, dtype=float)
    if chol_cov.shape != (mean.size, mean.size):
        raise ValueError("dimension mismatch between mean and factor")
    z = rng.standard_normal(mean.size)
    return mean + np.sqrt(scale) * (chol_cov @ z)


@dataclass(frozen=True)
class PosteriorMoments:
    """Gaussian posterior moments of a weighted regression: N(b, B)."""

    b: np.ndarray          # posterior mean
    cov: np.ndarray        # posterior covariance B
    chol: np.ndarray       # lower Cholesky factor of B

    @property
    def dim(self) -> int:
        return self.b.size


def posterior_moments(x: np.ndarray, z: np.ndarray, w: np.ndarray,
                      prior_precision: np.ndarray,
                      prior_linear: np.ndarray | None = None) -> PosteriorMoments:
    """Posterior moments of coefficients in a weighted Gaussian regression.

    With observations ``z[i] ~ N(x[i] @ beta, 1/w[i])`` and a zero-mean
    Gaussian prior with the given precision, the posterior is
    ``N(b, B)`` with ``B = (prior_precision + sum_i w_i x_i x_i')^{-1}`` and
    ``b = B (sum_i w_i x_i z_i + prior_linear)``.  ``prior_linear`` carries
    any extra linear term of the log posterior (zero by default).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.shape[0] != z.size or z.size != w.size:
        raise ValueError("x, z and w must agree on the number of observations")
    if z.size and w.min() <= 0:
        raise ValueError("weights must be positive")
    d = x.shape[1] if x.size else np.asarray(prior_precision).shape[0]
    precision = np.asarray(prior_precision, dtype=float) + (x.T * w) @ x
    linear = x.T @ (w * z) if z.size else np.zeros(d)
    if prior_linear is not None:
        linear = linear + np.asarray(prior_linear, dtype=float)
    chol_prec = cholesky(precision)
    cov = cho_solve((chol_prec, True), np.eye(d))
    cov = 0.5 * (cov + cov.T)
    b = cho_solve((chol_prec, True), linear)
    return PosteriorMoments(b=b, cov=cov, chol=cholesky(cov))

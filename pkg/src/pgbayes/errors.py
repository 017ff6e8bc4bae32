"""Exception types shared across the package."""


class PgbayesError(Exception):
    """Base class for all package-specific errors."""


class FactorizationError(PgbayesError):
    """A matrix that must be symmetric positive definite is not."""


class ConstraintError(PgbayesError):
    """Latent-variable constraints are violated (e.g. inverted threshold bounds)."""


class DegenerateChainError(PgbayesError):
    """A chain has zero variance and no spectral estimate exists."""


class InputError(PgbayesError):
    """Malformed user input (CSV rows, labels out of range, ...)."""

"""Exception types raised across the package.

Everything derives from DcbatsError so callers can catch package errors
with one clause. The CLI maps config/usage problems to exit code 2 and
runtime failures to exit code 1.
"""


class DcbatsError(Exception):
    """Base class for all package-specific errors."""


class DomainError(DcbatsError):
    """Argument outside its documented domain (bad K, u outside (0,1), ...)."""


class DivisibilityError(DcbatsError):
    """Series length is not an integer multiple of the partition size."""


class DimensionError(DcbatsError):
    """Vector or matrix shape does not match the declared parameter space."""


class SupportError(DcbatsError):
    """Parameter value violates its block's declared support."""


class NonPositiveVarianceError(DcbatsError):
    """A variance or innovation covariance lost positivity at runtime."""


class CovariateError(DcbatsError):
    """Covariates required but missing, unexpected, or mis-shaped."""


class InitializationError(DcbatsError):
    """No finite-density starting point found for a sampler chain."""


class NonFiniteError(DcbatsError):
    """NaN target density encountered; indicates a model or transform bug."""


class EmptyInputError(DcbatsError):
    """An operation received zero sample sets or an empty sample set."""


class LengthMismatchError(DcbatsError):
    """Sample sets of unequal size where equal sizes are required."""


class SpaceMismatchError(DcbatsError):
    """Draw sets to be combined do not share one parameter space."""


class ZeroVarianceError(DcbatsError):
    """Reference draws are degenerate; a variance ratio is undefined."""


class ParseError(DcbatsError):
    """Malformed CSV or config content, with row/column location."""


class MissingValueError(DcbatsError):
    """Missing cell in an input CSV, named by row and column."""


class ConfigError(DcbatsError):
    """Invalid experiment or simulation config document."""

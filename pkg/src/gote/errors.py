"""Exception types shared across the package."""


class GoteError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GoteError, ValueError):
    """An input lies outside the domain of an operation."""


class CapacityError(GoteError):
    """A requested object would exceed a configured size cap."""

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class DegeneracyError(DomainError):
    """Inputs are (numerically) linearly dependent where independence is needed."""


class PoleError(DomainError):
    """Evaluation point is too close to a pole of a Stieltjes transform."""

    def __init__(self, message: str, pole: float):
        super().__init__(message)
        self.pole = pole


class NumericError(GoteError, ArithmeticError):
    """A numerical check failed (e.g. a covariance is not PSD)."""


class UnsupportedError(GoteError, NotImplementedError):
    """No prediction is available for the requested case."""


class ConfigError(GoteError, ValueError):
    """Malformed or inconsistent experiment configuration."""

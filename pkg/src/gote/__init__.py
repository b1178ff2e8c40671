"""Spectra of contractions of the Gaussian orthogonal tensor ensemble."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    ConfigError,
    DegeneracyError,
    DomainError,
    GoteError,
    NumericError,
    PoleError,
    UnsupportedError,
)

__all__ = [
    "CapacityError",
    "ConfigError",
    "DegeneracyError",
    "DomainError",
    "GoteError",
    "NumericError",
    "PoleError",
    "UnsupportedError",
    "__version__",
]

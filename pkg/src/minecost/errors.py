"""Exception hierarchy shared across the package.

Every error carries a short machine-parseable ``code`` so the CLI can emit
``error[<code>]: <message>`` lines and scripts can grep for the class of
failure without parsing prose.
"""

from __future__ import annotations


class MinecostError(Exception):
    """Base class for all package errors."""

    code = "error"


class DomainError(MinecostError, ValueError):
    """An input lies outside the mathematical domain of an operation."""

    code = "domain"


class UndefinedPriceError(MinecostError):
    """The production-cost price is undefined (zero block reward)."""

    code = "undefined-price"


class ParseError(MinecostError):
    """Malformed input text; carries the 1-based line number when known."""

    code = "parse"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(MinecostError):
    """Well-formed input that violates a dataset invariant."""

    code = "validation"


class SingularityError(MinecostError):
    """A regressor matrix is singular or numerically unusable."""

    code = "singular"


class InsufficientDataError(MinecostError):
    """Too few observations for the requested estimation."""

    code = "insufficient-data"


class FetchError(MinecostError):
    """Remote download failed (transport, HTTP status, or empty payload)."""

    code = "fetch"


class CarriedForwardWarning(UserWarning):
    """A step-function lookup ran past the last table entry."""


class DegenerateThresholdWarning(UserWarning):
    """An episode threshold could not be formed (zero dispersion)."""

"""Exception hierarchy.

Errors fall into two classes that the command line maps to exit codes:
bad input data (``DataError``) and numerical failure (``NumericalError``).
"""


class ReconError(Exception):
    """Base class for all errors raised by this package."""

    stage = None
    hint = None


class DataError(ReconError, ValueError):
    """Malformed, inconsistent or out-of-range input."""


class DomainError(DataError):
    """An argument lies outside the domain of a function."""


class DimensionError(DataError):
    """Array shapes or grids do not agree."""


class InsufficientDataError(DataError):
    """Too few samples for the requested operation."""


class NumericalError(ReconError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class BracketError(NumericalError):
    """The discrepancy target is not bracketed by the alpha search range."""

    def __init__(self, message, alpha_lo, residual_lo, alpha_hi, residual_hi, delta):
        super().__init__(message)
        self.alpha_lo = alpha_lo
        self.residual_lo = residual_lo
        self.alpha_hi = alpha_hi
        self.residual_hi = residual_hi
        self.delta = delta


class RankDeficiencyError(NumericalError):
    """The refined design matrix lost column rank."""

    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair

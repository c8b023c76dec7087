"""
Exception hierarchy for ThreshScatter.
Every numerical failure derives from ThreshScatterError so the CLI can map it to exit code 1.
"""
from typing import Optional, Sequence


class ThreshScatterError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(ThreshScatterError, ValueError):
    """Dimension out of range, or wrong parity for the requested route."""


class DomainError(ThreshScatterError, ValueError):
    """Argument outside the domain of an operation."""


class DecayError(DomainError):
    """Profile tail decays slower than the operation requires."""


class RangeError(ThreshScatterError, ValueError):
    """Input lies outside the range where the numerical route is trusted."""


class PreconditionError(ThreshScatterError, ValueError):
    """Caller-supplied data violates a stated precondition."""


class GridMismatchError(ThreshScatterError, ValueError):
    """Two profiles that must share a grid do not."""


class NoResonanceError(ThreshScatterError):
    """Threshold data carries no resonance."""


class AccuracyError(ThreshScatterError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: Optional[float] = None):
        super().__init__(message)
        self.estimate = estimate


class AmbiguityError(ThreshScatterError):
    """Singular values cluster near the null-space threshold."""

    def __init__(self, message: str, cluster: Sequence[float] = ()):
        super().__init__(message)
        self.cluster = list(cluster)


class UsageError(ValueError):
    """Bad input from the command line or a run config. Not a numerical failure, so exit code 2."""

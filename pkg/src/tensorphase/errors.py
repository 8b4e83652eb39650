"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`TensorPhaseError`, so callers can separate them from bugs.
"""


class TensorPhaseError(Exception):
    """Base class for all package errors."""


class ShapeError(TensorPhaseError, ValueError):
    """Operand dimensions are incompatible with the operation."""


class RangeError(TensorPhaseError, IndexError):
    """An index lies outside its dimension box."""


class FormatError(TensorPhaseError, ValueError):
    """A tensor or system file does not follow the JSON format."""


class DomainError(TensorPhaseError, ValueError):
    """The input lies outside the mathematical domain of the operation."""


class NotSectorialError(DomainError):
    """A sectorial tensor was required but 0 lies in the numerical range."""

    def __init__(self, msg="not sectorial", max_support=None):
        super().__init__(msg)
        self.max_support = max_support


class PreconditionError(TensorPhaseError):
    """A checked precondition of a theorem-level operation does not hold."""


class SizeError(TensorPhaseError):
    """A combinatorial guard refused an oversized request."""


class NumericError(TensorPhaseError, ArithmeticError):
    """A computation lost too much accuracy to return a trustworthy result."""


class SingularityError(NumericError):
    """Matrix is singular to working precision.

    ``condition`` holds the 2-norm condition estimate that triggered the
    refusal.
    """

    def __init__(self, msg, condition=float("inf")):
        super().__init__(msg)
        self.condition = condition


class NotPositiveDefiniteError(NumericError):
    """Cholesky factorization met a non-positive pivot."""


class RankError(NumericError):
    """Input is rank deficient where full column rank is required."""


class PoleError(NumericError):
    """The resolvent ``(sI - A)^{-1}`` does not exist at the requested point."""


class WellPosednessError(TensorPhaseError):
    """A feedback interconnection is not well posed (``I + D_H D_G`` singular)."""

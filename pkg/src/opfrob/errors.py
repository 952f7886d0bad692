"""Exception types shared across the package."""


class OpfrobError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(OpfrobError):
    """Raised when expression text cannot be parsed; carries the byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprEvalError(OpfrobError):
    """Raised on evaluation singularities (division by zero, 0^negative)."""


class SingularMatrixError(OpfrobError):
    """Raised when elimination meets a pivot below the singularity threshold."""


class SqrtConvergenceError(OpfrobError):
    """Raised when the coupled square-root iteration fails to converge,
    signalling that the spectrum precondition is violated."""


class NonCommutingError(OpfrobError):
    """Raised when a bracket is requested for operator values that do not
    commute at the evaluation point."""


class OneFormNotClosedError(OpfrobError):
    """Raised when a 1-form claimed closed has nonzero exterior derivative."""


class GenericityError(OpfrobError):
    """Raised when no generic vector/covector could be found by sampling."""

"""Exception types shared across the package."""


class PInnerError(Exception):
    """Base class for all errors raised by :mod:`pinner`."""


class PreconditionError(PInnerError, ValueError):
    """An input violates the documented precondition of an operation."""


class ConvergenceError(PInnerError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    The last iterate and the final residual measure are kept on the
    exception so callers can inspect or serialize them.
    """

    def __init__(self, message, *, last_iterate=None, residual=None, iterations=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class ExponentOverflowError(PInnerError, OverflowError):
    """A sparse product would produce an exponent outside the unsigned 64-bit range."""


class ExponentCollisionError(PInnerError, ArithmeticError):
    """Two terms of a product that was required to have distinct exponents collided."""

"""Exception hierarchy shared by all analysis modules."""


class DetectError(Exception):
    """Base class for every error raised by this package."""


class InputError(DetectError, ValueError):
    """Malformed matrices, incompatible dimensions or invalid graphs."""


class NumericalError(DetectError, ArithmeticError):
    """A numerical routine could not deliver a trustworthy answer."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConsistencyError(DetectError):
    """Two independent computations of the same object disagree."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class PreconditionError(DetectError):
    """An operation was called on an input that violates its precondition."""

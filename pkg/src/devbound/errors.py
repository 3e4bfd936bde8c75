"""Exception types shared across the package.

Sample-size floors are hard preconditions of every deviation theorem, so
violating one raises :class:`PreconditionError` carrying the numeric floor
that the caller must meet.
"""


class DevboundError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(DevboundError, ValueError):
    """An argument is outside the operation's domain."""


class PreconditionError(DevboundError, ValueError):
    """A stated theorem precondition does not hold.

    Attributes:
        floor: the violated lower bound (e.g. minimum sample size), when known.
    """

    def __init__(self, message, floor=None):
        super().__init__(message)
        self.floor = floor


class NumericError(DevboundError, ArithmeticError):
    """A computation produced non-finite or inconsistent values."""


class UnsupportedOrderError(InvalidArgumentError):
    """A moment of the requested order does not exist for the distribution."""

"""Exception hierarchy.

Each class maps to one CLI exit code (see :mod:`ballmax.cli`).
"""


class BallmaxError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(BallmaxError, ValueError):
    """Malformed input or violated precondition."""

    exit_code = 2


class ScaleGuardError(BallmaxError):
    """Desk-scale routine called on a problem that is too large."""

    exit_code = 3


class InconclusiveError(BallmaxError, ArithmeticError):
    """A numerical routine could not reach a verdict."""

    exit_code = 4

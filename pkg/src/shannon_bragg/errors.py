"""Exception types shared by every module; the CLI maps each one to an exit code."""


class ShannonBraggError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 1


class InvalidArgumentError(ShannonBraggError, ValueError):
    exit_code = 2


class ResourceLimitError(ShannonBraggError, RuntimeError):
    """A requested computation exceeds a documented size bound."""

    exit_code = 3


class DomainError(ShannonBraggError, ArithmeticError):
    """A formula is evaluated outside the region where it is defined."""

    exit_code = 4


class NumericError(ShannonBraggError, ArithmeticError):
    """Overflow, non-convergence or a similar numerical failure."""

    exit_code = 4

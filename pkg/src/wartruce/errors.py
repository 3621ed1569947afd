"""Exception hierarchy shared by every module of the package."""


class WartruceError(Exception):
    """Base class for all package errors."""


class InvalidInputError(WartruceError, ValueError):
    """An argument is outside the domain of the operation."""


class InvalidStateError(WartruceError, ValueError):
    """A density does not satisfy non-negativity or unit mass."""


class StepSizeError(WartruceError, ValueError):
    """The Euler step violates the stability guard."""


class DegenerateStateError(WartruceError, ArithmeticError):
    """A density collapsed to zero mass."""


class NumericError(WartruceError, ArithmeticError):
    """A numerical procedure (bracketing, bisection) failed."""

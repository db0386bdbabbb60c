"""Exception hierarchy. Each family maps to one CLI exit code."""


class CollapseBoundsError(Exception):
    exit_code = 1


class InputError(CollapseBoundsError, ValueError):
    """Malformed or missing input (exit 1)."""

    exit_code = 1


class ParseError(InputError):
    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token


class DimensionError(InputError):
    """Quantities of incompatible dimension were combined or converted."""


class DomainError(CollapseBoundsError, ValueError):
    """Physically invalid argument, e.g. a non-positive length (exit 2)."""

    exit_code = 2


class ModelMismatchError(DomainError):
    pass


class NoFiniteBoundError(DomainError):
    """Upper limit on the specific power is zero, so every length is allowed."""


class NumericalError(CollapseBoundsError, ArithmeticError):
    exit_code = 3


class SingularFitError(NumericalError):
    pass

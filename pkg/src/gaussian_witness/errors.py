"""Exception hierarchy shared by the library and the CLI."""


class WitnessError(Exception):
    """Base class for all errors raised by gaussian_witness."""


class ValidationError(WitnessError, ValueError):
    """An input violates a structural or physical invariant."""


class UnsupportedInputError(WitnessError, ValueError):
    """The input is valid but outside the class an operation handles."""


class CapacityError(WitnessError, ValueError):
    """A requested expansion order exceeds the supported bound."""


class ConsistencyError(WitnessError, ArithmeticError):
    """An internal numerical cross-check failed (e.g. a non-cancelling x^4 term)."""

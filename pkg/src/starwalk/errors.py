"""Exception hierarchy shared by all starwalk modules."""


class StarwalkError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StarwalkError, ValueError):
    """A parameter set violates one of its invariants."""


class DomainError(StarwalkError, ValueError):
    """A function was evaluated outside its domain (e.g. t <= 0)."""


class NumericalError(StarwalkError, ArithmeticError):
    """Quadrature or linear algebra failed to reach the requested accuracy."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class PoleError(NumericalError):
    """The spectral parameter sits (numerically) on a pole of an S-matrix."""

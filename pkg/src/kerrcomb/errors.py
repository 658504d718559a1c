"""Exception hierarchy shared across modules.

``ValidationError`` subclasses signal bad inputs (CLI exit code 2); the
``NumericalError`` family signals a computation that could not complete
(exit code 3).
"""


class KerrcombError(Exception):
    """Base class for all package errors."""


class ValidationError(KerrcombError, ValueError):
    """Input outside the documented domain."""


class DomainError(ValidationError):
    """Modulus or argument out of range."""


class AdmissibilityError(ValidationError):
    """Detuning ratio outside the range where the comb branch exists."""


class NumericalError(KerrcombError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy result."""


class RegimeError(NumericalError):
    """Quartic first integral does not have four real roots."""


class SolvabilityError(NumericalError):
    """Right-hand side is not orthogonal to the operator kernel."""


class ConvergenceError(NumericalError):
    """Newton iteration did not converge."""


class ContinuationError(NumericalError):
    """Branch continuation broke down; ``last_h`` is the last converged value."""

    def __init__(self, message, last_h=None, profiles=None):
        super().__init__(message)
        self.last_h = last_h
        self.profiles = profiles or []


class MultiplicityError(NumericalError):
    """Requested eigenvalue is not simple."""


class SpectrumError(NumericalError):
    """Dense eigensolver failed."""


class DegenerateIntegrandError(NumericalError):
    """Quadrature integrand has a vanishing denominator."""


class BlowUpError(NumericalError):
    """Time integration produced non-finite values; ``t_last`` is the last finite time."""

    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last


class InsufficientRangeError(NumericalError):
    """History spans too little change to fit a rate."""

"""Exception hierarchy shared across the package."""


class FuncballError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FuncballError, ValueError):
    """An invalid parameter combination (bad quadrant, bad scheme, ...)."""


class DomainError(FuncballError, ValueError):
    """An argument outside the mathematical domain of an operation."""


class AccuracyError(FuncballError, ArithmeticError):
    """A deterministic integrator could not meet the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to accept the degraded result.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound

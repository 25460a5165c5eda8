"""Exception types shared by the numeric and sampling layers."""


class VBalancedError(Exception):
    """Base class for all package errors."""


class DomainError(VBalancedError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(VBalancedError, ValueError):
    """A generating function is evaluated at or beyond its radius of convergence."""


class ConvergenceError(VBalancedError, RuntimeError):
    """A series, CDF accumulation or root search failed to converge."""


class RejectionError(VBalancedError, RuntimeError):
    """A size-targeted rejection sampler exhausted its attempt budget."""

    def __init__(self, message, attempts=0):
        super().__init__(message)
        self.attempts = attempts

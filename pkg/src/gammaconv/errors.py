"""Exception types shared across the package."""


class GammaConvError(Exception):
    """Base class for all package-specific errors."""


class DomainError(GammaConvError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(GammaConvError, ArithmeticError):
    """A series failed to reach the requested tolerance within its term cap.

    Attributes carry diagnostics: the number of terms consumed and the
    magnitude of the last term relative to the accumulated sum.
    """

    def __init__(self, message, terms_used=None, last_term=None):
        super().__init__(message)
        self.terms_used = terms_used
        self.last_term = last_term


class FitFailureError(GammaConvError, ArithmeticError):
    """The moment-matching system has no solution in the valid region."""


class BudgetError(DomainError):
    """A combinatorial enumeration would exceed its configured budget."""

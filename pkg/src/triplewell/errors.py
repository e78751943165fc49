"""Exception types shared across the package."""

from __future__ import annotations


class TripleWellError(Exception):
    """Base class for every error raised by this package."""


class QuadratureError(TripleWellError):
    def __init__(self, a, b, estimate=None):
        self.interval = (a, b)
        self.error_estimate = estimate
        msg = f"quadrature failed to converge on [{a}, {b}]"
        if estimate is not None:
            msg += f" (last error estimate {float(estimate):.3e})"
        super().__init__(msg)


class MethodNotAllowedError(TripleWellError):
    pass


class SeriesConvergenceError(TripleWellError):
    pass


class SingularSystemError(TripleWellError):
    pass


class EigensolveError(TripleWellError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class EscalationBudgetError(TripleWellError):
    """Raised when precision escalation runs out of budget.

    ``best`` holds the most refined ``(SpectrumTriplet, EigenResult)`` reached.
    """

    def __init__(self, message, best=None):
        self.best = best
        super().__init__(message)

"""Exception hierarchy shared by all modules."""


class SRAnosovError(Exception):
    """Base class for library errors."""


class DomainError(SRAnosovError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConsistencyError(SRAnosovError):
    """Two independent evaluation routes disagree beyond their budget."""


class IntegrationError(SRAnosovError):
    """The adaptive integrator could not advance (step size underflow)."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


class AccuracyError(SRAnosovError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConvergenceError(SRAnosovError):
    """Newton iteration diverged or ran out of iterations."""

    def __init__(self, message, best, residual_norm):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm


class FitError(SRAnosovError):
    """A closed-form pendulum solution could not be fitted to the data."""


class SearchFailure(SRAnosovError):
    """No multistart shooting run converged."""

    def __init__(self, message, best_residuals):
        super().__init__(message)
        self.best_residuals = best_residuals

"""Exception hierarchy shared by the ilms modules."""


class ILMSError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ILMSError, ValueError):
    """Inputs are malformed or violate a documented precondition."""


class ConvergenceError(ILMSError):
    """An iterative numerical routine ran out of iterations."""


class SingularMatrixError(ILMSError):
    """A linear system has a pivot below the singularity threshold."""


class FactorizationError(ILMSError):
    """A covariance matrix could not be factorized (not positive definite)."""


class InstabilityError(ILMSError):
    """The mean-square recursion is not contractive (spectral radius >= 1)."""

    def __init__(self, message, spectral_radius=None):
        super().__init__(message)
        self.spectral_radius = spectral_radius


class DivergenceError(ILMSError):
    """A simulated filter estimate blew up."""

    def __init__(self, message, iteration=None, replica=None):
        super().__init__(message)
        self.iteration = iteration
        self.replica = replica

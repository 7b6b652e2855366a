"""Exception types shared across the package."""


class RefractedLevyError(Exception):
    """Base class for all package errors."""


class DomainError(RefractedLevyError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ModelValidationError(RefractedLevyError, ValueError):
    """A model or parameter file violates the schema or a parameter constraint."""


class ConvergenceError(RefractedLevyError, RuntimeError):
    """An iterative numerical procedure failed to converge."""


class QuadratureError(ConvergenceError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, residual=None, interval=None):
        super().__init__(message)
        self.residual = residual
        self.interval = interval


class CapabilityError(RefractedLevyError, NotImplementedError):
    """The requested operation is not supported for this model family."""


class InternalConsistencyError(RefractedLevyError, RuntimeError):
    """A computed quantity violates a structural property (e.g. a density
    came out significantly negative), signalling a numerical bug upstream."""

"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematically valid domain."""


class ValidationError(ValueError):
    """A state or matrix fails a structural invariant (normalization, symmetry)."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured memory/dimension cap."""


class NumericalError(RuntimeError):
    """A numerical routine produced an internally inconsistent result."""


class OptimizationError(RuntimeError):
    """Optimizer failed to converge. Carries the best iterate found so far."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EstimationError(RuntimeError):
    """Spectral estimation failed. Carries the detected peak table for diagnosis."""

    def __init__(self, message, peaks=None):
        super().__init__(message)
        self.peaks = tuple(peaks) if peaks is not None else ()

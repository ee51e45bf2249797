"""Exception hierarchy shared across the package."""


class ReactivePPError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(ReactivePPError, ValueError):
    """A model or config parameter violates its domain constraint."""


class DimensionMismatchError(ReactivePPError, ValueError):
    """Array arguments disagree in shape or binning."""


class ValidationError(ReactivePPError, ValueError):
    """Input data failed validation (schema, ordering, referential integrity)."""


class InsufficientDataError(ReactivePPError, ValueError):
    """An estimator was given too little data to produce a result."""


class ConvergenceError(ReactivePPError, RuntimeError):
    """An iterative fit failed to converge from every start."""


class ToleranceNotReachedError(ReactivePPError, RuntimeError):
    """Adaptive quadrature hit max subdivision depth above tolerance."""


class RunawayIntensityError(ReactivePPError, RuntimeError):
    """Simulated intensity exceeded the configured runaway ceiling."""

    def __init__(self, message, time=None, n_events=None):
        super().__init__(message)
        self.time = time
        self.n_events = n_events


class ZeroIntensityWarning(UserWarning):
    """An observed event fell at a time where the model intensity is zero."""

"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a configuration is internally inconsistent.

    Carries enough context to show which values conflict (e.g. a rotation
    frequency that does not land on an FFT bin center).
    """


class FilterDivergenceError(RuntimeError):
    """Raised when the particle filter has no usable particles left."""

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index

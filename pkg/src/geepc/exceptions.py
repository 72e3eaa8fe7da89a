"""Exception types shared across the package."""


class PowerControlError(Exception):
    """Base class for errors raised by this package."""


class InfeasibleError(PowerControlError):
    """A target-SINR vector cannot be met within the power caps.

    `details` carries the violated bound: either the structural margin
    (interference load >= 1) or the per-UE cap that would be exceeded.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class SolverFailureError(PowerControlError):
    """The centralized solver exhausted its budget without converging."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(PowerControlError):
    """An experiment configuration file or value is invalid."""

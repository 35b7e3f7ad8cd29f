"""Exception hierarchy shared by the library and the CLI."""


class CogFeedbackError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CogFeedbackError, ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(CogFeedbackError, ValueError):
    """Root-finding target is not bracketed by the supplied interval."""


class ConvergenceError(CogFeedbackError, RuntimeError):
    """An iterative numerical routine hit its iteration cap."""


class InfeasibleError(CogFeedbackError):
    """No allocation / beam satisfies the constraints.

    ``reason`` carries a short machine-readable tag (for example the
    control shortcut that triggered it).
    """

    def __init__(self, message, reason=None):
        super().__init__(message)
        self.reason = reason


class ResourceLimitError(CogFeedbackError):
    """A request would exceed a configured memory or size cap."""


class InstabilityError(CogFeedbackError):
    """Queue service rate does not exceed the arrival rate."""


class ConfigError(CogFeedbackError, ValueError):
    """Configuration file could not be parsed or failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

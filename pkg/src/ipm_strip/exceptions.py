class IPMError(Exception):
    """Base class for errors raised by ipm_strip."""


class ResolutionError(IPMError):
    """Grid or truncation too coarse for the requested operation."""


class PreconditionError(IPMError, ValueError):
    """Input violates an operation's precondition."""


class StabilityError(IPMError):
    """Time step exceeds the stability bound."""


class NumericalAbort(IPMError):
    """Run aborted by a runtime monitor (non-finite norm or blow-up monitor)."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class ConfigError(IPMError, ValueError):
    """Invalid simulation configuration."""

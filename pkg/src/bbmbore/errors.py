"""Exception hierarchy shared by all modules."""


class BBMError(Exception):
    """Base class for package errors."""


class ConfigurationError(BBMError, ValueError):
    """Invalid grid, field, parameter or config input.

    ``field`` names the offending config entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DegenerateGridError(ConfigurationError):
    """Grid too coarse to host any dyadic block j >= 0."""


class DomainTooSmallError(ConfigurationError):
    """Bore transition does not fit between the periodization buffers."""


class DomainError(BBMError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class BlowUpError(BBMError, FloatingPointError):
    """Non-finite values produced during time integration."""

    def __init__(self, t, message="non-finite values in solution"):
        self.t = t
        super().__init__(f"{message} at t={t:.6g}")


class ContaminationError(BBMError):
    """Periodization buffer leak exceeded its tolerance."""

    def __init__(self, t, leak, limit):
        self.t, self.leak, self.limit = t, leak, limit
        super().__init__(f"buffer leak {leak:.3e} > {limit:.3e} at t={t:.6g}")

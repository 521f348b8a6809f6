"""Exception types shared across the package."""


class RisKeyError(Exception):
    """Base class for all package errors."""


class ConfigError(RisKeyError, ValueError):
    """Invalid scenario, protocol or run configuration.

    ``lineno`` is set when the error originates from a config file line.
    """

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DomainError(RisKeyError, ValueError):
    """Numeric input outside the domain of a formula."""

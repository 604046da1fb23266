"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a physical operation."""


class ConfigError(ValueError):
    """A configuration or definition file is invalid.

    ``field`` names the offending key when one is known; the message is
    prefixed with it unless it already mentions the key.
    """

    def __init__(self, message, field=None):
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class ScanFormatError(ValueError):
    """A scan CSV file is malformed; ``line`` is the 1-based file line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LeakageError(ValueError):
    """Sampled data does not decay at the grid edges as a transform requires."""


class FitError(RuntimeError):
    """Line fitting failed. ``result`` holds the best parameters found so far."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result

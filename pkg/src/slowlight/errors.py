"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A physical or numerical parameter violates a module invariant.

    ``field`` names the offending parameter (dotted path when it comes from a
    scenario config) so that callers can report it machine-readably.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConfigError(Exception):
    """A config file could not be read or parsed at all."""

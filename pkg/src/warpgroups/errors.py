"""Exception types shared by the package."""

from __future__ import annotations


class WarpError(Exception):
    """Base class for all library errors."""


class GuardError(WarpError, ValueError):
    """A resource guard tripped (vertex count, word count, cell count)."""


class ScaleError(WarpError, ValueError):
    """The requested scale does not produce a usable complex on this net."""


class HypothesisError(WarpError, ValueError):
    """The hypotheses of a prediction are not met by the supplied parameters."""


class ConfigError(WarpError, ValueError):
    """An experiment configuration failed validation."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)

"""Exception hierarchy for specwave.

Every error raised for bad input derives from ``ValueError`` as well as
``SpecwaveError``, so callers that only know about ``ValueError`` keep working.
Numerical blow-up is not an error: it is recorded on the evolution trace.
"""

from typing import Any


class SpecwaveError(Exception):
    """Base class for all specwave errors."""


class ConstructionError(SpecwaveError, ValueError):
    """A backend could not be built from the given operator data."""


class ParameterError(SpecwaveError, ValueError):
    """A scalar argument, step, or time window is invalid."""


class ShapeError(SpecwaveError, ValueError):
    """Array lengths or backends do not match."""


class DomainError(SpecwaveError, ValueError):
    """A kernel was evaluated outside the range where it is defined."""


class DataError(SpecwaveError, ValueError):
    """A trace lacks the data an analysis needs (missing channel, non-positive norm)."""


class ConfigError(SpecwaveError, ValueError):
    """A configuration key is unknown, malformed, or violates a constraint."""

    def __init__(self, key: str, constraint: str, value: Any = None):
        self.key = key
        self.constraint = constraint
        self.value = value
        message = f"{key}: {constraint}"
        if value is not None:
            message += f" (got {value!r})"
        super().__init__(message)


class OutputError(SpecwaveError, OSError):
    """An output file could not be written, or held values that cannot be emitted."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")

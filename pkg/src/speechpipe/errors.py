"""Exception types shared across the toolkit."""

from __future__ import annotations


class PipelineError(ValueError):
    """Base class for all toolkit errors."""


class ParameterError(PipelineError):
    """An argument is outside its documented domain."""


class StructuralError(PipelineError):
    """Inputs are individually valid but mutually inconsistent."""


class FormatError(PipelineError):
    """A file or byte stream violates its documented format.

    ``line`` or ``offset`` locate the defect when known.
    """

    def __init__(self, message: str, *, line: int | None = None, offset: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class UndefinedMetricError(PipelineError):
    """A metric has no defined value for this input (e.g. empty reference)."""


class ConfigError(PipelineError):
    """A configuration file or flag combination is invalid."""

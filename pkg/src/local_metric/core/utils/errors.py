"""
Copyright 2025 local-metric contributors

Exceptions raised by the library. Each one carries the exit code the CLI leaves with.
"""
from typing import Optional


class LocalMetricError(Exception):
    exit_code: int = 1


class ConfigurationError(LocalMetricError):
    """Invalid configuration, flags or arguments (usage error)."""
    exit_code = 1


class DataFormatError(LocalMetricError):
    """Unreadable or malformed dataset."""
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + location)


class NumericalError(LocalMetricError):
    """The optimization produced a non-finite value, usually a too large learning rate."""
    exit_code = 3


class GradientCheckError(LocalMetricError):
    exit_code = 4

"""Structured errors shared across the package.

Every error carries a stable machine-readable ``code`` plus an optional source
location, so the service and the CLI can surface them uniformly.
"""

from __future__ import annotations


class SketchPipeError(Exception):
    """Base class for structured errors raised by this package."""

    code = "Error"

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "column": self.column,
        }

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.code} at line {self.line}, column {self.column}: {self.message}"
        return f"{self.code}: {self.message}"


class IoError(SketchPipeError):
    """Filesystem failure while reading or writing an artifact."""

    code = "IoError"

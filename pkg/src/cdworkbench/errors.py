"""Error types shared across the package."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base error carrying a machine-readable code for CLI/API surfaces."""

    def __init__(self, code: str, message: str, details: list | None = None):
        super().__init__(message)
        self.code = code
        self.message = message
        self.details = details or []

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class ParseError(WorkbenchError):
    """CSV-level failure; `line` is the 1-based physical line in the input."""

    def __init__(self, code: str, message: str, line: int | None = None):
        super().__init__(code, message)
        self.line = line

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["line"] = self.line
        return d


class DomainError(WorkbenchError):
    """Invalid request against an otherwise healthy model or dataset."""

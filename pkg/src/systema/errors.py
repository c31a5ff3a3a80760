"""Exception types and diagnostics shared across the package."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token range. ``start``/``end`` are UTF-8 byte offsets."""

    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan | None = None
    path: str | None = None
    criterion: str | None = None  # SP / CP / PP / KP / PR

    def location(self) -> str:
        if self.span is not None:
            return str(self.span)
        return self.path or "?"

    def __str__(self) -> str:
        tag = f"[{self.criterion}] " if self.criterion else ""
        return f"{self.location()}: {self.severity}: {tag}{self.message}"


class SystemAError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SystemAError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


class UnboundParameterError(SystemAError):
    """A size parameter or index variable has no value at instantiation."""


class CapExceeded(SystemAError):
    """An enumeration guard (trace count, state count, n!) was hit."""

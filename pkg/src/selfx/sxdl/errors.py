"""Positioned errors for the document language."""

from __future__ import annotations


class SxdlError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0, token: str = ""):
        self.message = message
        self.line = line
        self.col = col
        self.token = token
        where = f" at line {line}, column {col}" if line else ""
        offending = f" (near {token!r})" if token else ""
        super().__init__(f"{message}{where}{offending}")


class SxdlParseError(SxdlError):
    """Lexical error, syntax error, or forward reference in a document."""


class SxdlLoadError(SxdlError):
    """A parsed document could not be asserted; the KB was left unchanged."""

"""Textual language for knowledge documents (.sxdl files).

parse() turns text into a Document, load() asserts a Document into a
knowledge base atomically, and dump() writes the asserted facts of a
knowledge base back out as a document that reloads to an isomorphic KB.
"""

from .errors import SxdlError, SxdlLoadError, SxdlParseError
from .loader import LoadReport, load
from .nodes import Document
from .parser import parse
from .printer import dump

__all__ = [
    "Document", "LoadReport", "SxdlError", "SxdlLoadError", "SxdlParseError",
    "dump", "load", "parse",
]

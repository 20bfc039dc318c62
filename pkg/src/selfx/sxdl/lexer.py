"""Hand-rolled tokenizer. Tracks 1-based line/column for every token."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SxdlParseError

# "effect" is matched contextually inside behavior declarations so that it
# stays usable as a role name (processing requirements link via it)
KEYWORDS = frozenset({
    "class", "instance", "link", "environment", "behavior",
    "has", "role", "true", "false", "nan",
})

_PUNCT = {
    "{": "LBRACE", "}": "RBRACE", ":": "COLON", ";": "SEMI",
    "=": "EQ", ".": "DOT",
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


def _digit(c: str) -> bool:
    return "0" <= c <= "9"


def _ident_start(c: str) -> bool:
    return c == "_" or "a" <= c <= "z" or "A" <= c <= "Z"


def _ident_char(c: str) -> bool:
    return _ident_start(c) or _digit(c)


@dataclass
class Token:
    kind: str  # IDENT, STRING, NUMBER, EOF, a keyword, or a punct kind
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def error(message, tok=""):
        raise SxdlParseError(message, line, col, tok)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "/" and text[i:i + 2] == "//":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "-" and text[i:i + 2] == "->":
            tokens.append(Token("ARROW", "->", line, col))
            i, col = i + 2, col + 2
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, line, col))
            i, col = i + 1, col + 1
            continue
        if ch == '"':
            i, col = i + 1, col + 1
            parts = []
            while True:
                if i >= n or text[i] == "\n":
                    line, col = start_line, start_col
                    error("unterminated string literal")
                c = text[i]
                if c == '"':
                    i, col = i + 1, col + 1
                    break
                if c == "\\":
                    esc = text[i + 1:i + 2]
                    if esc not in _ESCAPES:
                        error(f"unknown string escape: \\{esc}", esc)
                    parts.append(_ESCAPES[esc])
                    i, col = i + 2, col + 2
                    continue
                parts.append(c)
                i, col = i + 1, col + 1
            tokens.append(Token("STRING", "".join(parts), start_line, start_col))
            continue
        if _digit(ch) or (ch == "-" and _digit(text[i + 1:i + 2] or " ")):
            j = i + 1
            while j < n and _digit(text[j]):
                j += 1
            if j < n and text[j] == "." and _digit(text[j + 1:j + 2] or " "):
                j += 1
                while j < n and _digit(text[j]):
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and _digit(text[k]):
                    j = k + 1
                    while j < n and _digit(text[j]):
                        j += 1
            word = text[i:j]
            tokens.append(Token("NUMBER", word, start_line, start_col))
            col += j - i
            i = j
            continue
        if _ident_start(ch):
            j = i + 1
            while j < n and _ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        error(f"unexpected character {ch!r}", ch)
    tokens.append(Token("EOF", "", line, col))
    return tokens

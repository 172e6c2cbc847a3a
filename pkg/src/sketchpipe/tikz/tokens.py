"""Lexer for the sketch dialect.

The token stream is intentionally coarse: option lists and coordinate groups
are single tokens whose contents are interpreted by the parser.  Comments
(``%`` to end of line) are stripped, and every token records the 1-based line
and column where it starts.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from sketchpipe.tikz.errors import (
    InvalidNumber,
    UnterminatedCoordinate,
    UnterminatedOptionList,
)

PT_PER_CM = 28.3465


class TokenKind(Enum):
    BEGIN = "begin"                # \begin{tikzpicture}
    END = "end"                    # \end{tikzpicture}
    FILL = "fill"                  # \fill
    DRAW = "draw"                  # \draw
    PATH = "path"                  # \path
    USE_BBOX = "useasboundingbox"  # \useasboundingbox
    COMMAND = "command"            # any other \name
    OPTIONS = "options"            # [ ... ]
    COORD = "coord"                # ( x , y )
    LENGTH = "length"              # ( r )
    DASHDASH = "--"
    DOTDOT = ".."
    CIRCLE = "circle"
    RECTANGLE = "rectangle"
    CYCLE = "cycle"
    NAME = "name"                  # bare identifier
    SEMICOLON = ";"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int
    value: object = None  # float for LENGTH, (float, float) for COORD, str for OPTIONS

    def __repr__(self) -> str:  # compact, useful in parser error messages
        return f"Token({self.kind.name}, {self.text!r}, {self.line}:{self.column})"


_COMMAND_KINDS = {
    "fill": TokenKind.FILL,
    "draw": TokenKind.DRAW,
    "path": TokenKind.PATH,
    "useasboundingbox": TokenKind.USE_BBOX,
}

_WORD_KINDS = {
    "circle": TokenKind.CIRCLE,
    "rectangle": TokenKind.RECTANGLE,
    "cycle": TokenKind.CYCLE,
}

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def _parse_length(text: str, line: int, column: int) -> float:
    """Parse a number with optional cm/pt suffix; the result is in cm."""
    raw = text.strip()
    m = _NUMBER_RE.fullmatch(raw)
    unit = None
    if m is None:
        for suffix in ("cm", "pt"):
            if raw.endswith(suffix):
                body = raw[: -len(suffix)].strip()
                if _NUMBER_RE.fullmatch(body):
                    m = _NUMBER_RE.fullmatch(body)
                    unit = suffix
                break
    if m is None:
        raise InvalidNumber(f"invalid numeric literal {raw!r}", line=line, column=column)
    value = float(m.group(0))
    if not math.isfinite(value):
        raise InvalidNumber(f"numeric literal {raw!r} overflows", line=line, column=column)
    if unit == "pt":
        value /= PT_PER_CM
    return value


def tokenize(source: str, start_line: int = 1, start_column: int = 1) -> list[Token]:
    """Tokenize sketch source into the dialect's token stream.

    ``start_line``/``start_column`` shift reported positions when ``source`` is
    a slice of a larger document.  Raises a ``TikzError`` subclass with a
    source location on malformed lexical input.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)
    line = start_line
    col = start_column

    def advance(text: str) -> None:
        nonlocal line, col
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            j = i
            while j < n and source[j] in " \t\r\n":
                j += 1
            advance(source[i:j])
            i = j
            continue
        if ch == "%":
            j = source.find("\n", i)
            j = n if j == -1 else j
            advance(source[i:j])
            i = j
            continue

        tok_line, tok_col = line, col

        if ch == "\\":
            j = i + 1
            while j < n and source[j].isalpha():
                j += 1
            name = source[i + 1 : j]
            text = source[i:j]
            if name in ("begin", "end"):
                m = re.match(r"\s*\{([^}]*)\}", source[j:])
                if m and m.group(1) == "tikzpicture":
                    text = source[i : j + m.end()]
                    kind = TokenKind.BEGIN if name == "begin" else TokenKind.END
                    tokens.append(Token(kind, text, tok_line, tok_col))
                else:
                    if m:
                        text = source[i : j + m.end()]
                    tokens.append(Token(TokenKind.COMMAND, text, tok_line, tok_col))
                advance(text)
                i += len(text)
                continue
            kind = _COMMAND_KINDS.get(name, TokenKind.COMMAND)
            tokens.append(Token(kind, text, tok_line, tok_col))
            advance(text)
            i = j
            continue

        if ch == "[":
            j = source.find("]", i + 1)
            if j == -1:
                raise UnterminatedOptionList(
                    "option list opened here is never closed", line=tok_line, column=tok_col
                )
            body = source[i + 1 : j]
            text = source[i : j + 1]
            tokens.append(Token(TokenKind.OPTIONS, text, tok_line, tok_col, value=body))
            advance(text)
            i = j + 1
            continue

        if ch == "(":
            j = source.find(")", i + 1)
            if j == -1:
                raise UnterminatedCoordinate(
                    "coordinate opened here is never closed", line=tok_line, column=tok_col
                )
            body = source[i + 1 : j]
            text = source[i : j + 1]
            parts = body.split(",")
            if len(parts) == 1:
                value: object = _parse_length(parts[0], tok_line, tok_col)
                tokens.append(Token(TokenKind.LENGTH, text, tok_line, tok_col, value=value))
            elif len(parts) == 2:
                x = _parse_length(parts[0], tok_line, tok_col)
                y = _parse_length(parts[1], tok_line, tok_col)
                tokens.append(Token(TokenKind.COORD, text, tok_line, tok_col, value=(x, y)))
            else:
                raise InvalidNumber(
                    f"expected one or two comma-separated numbers, got {body!r}",
                    line=tok_line,
                    column=tok_col,
                )
            advance(text)
            i = j + 1
            continue

        if source.startswith("--", i):
            tokens.append(Token(TokenKind.DASHDASH, "--", tok_line, tok_col))
            advance("--")
            i += 2
            continue
        if source.startswith("..", i):
            tokens.append(Token(TokenKind.DOTDOT, "..", tok_line, tok_col))
            advance("..")
            i += 2
            continue
        if ch == ";":
            tokens.append(Token(TokenKind.SEMICOLON, ";", tok_line, tok_col))
            advance(";")
            i += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and source[j].isalpha():
                j += 1
            word = source[i:j]
            kind = _WORD_KINDS.get(word, TokenKind.NAME)
            tokens.append(Token(kind, word, tok_line, tok_col))
            advance(word)
            i = j
            continue

        tokens.append(Token(TokenKind.UNKNOWN, ch, tok_line, tok_col))
        advance(ch)
        i += 1

    return tokens

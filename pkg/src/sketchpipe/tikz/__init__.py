"""Lexer, parser and pretty-printer for the sketch dialect (a TikZ subset)."""

from sketchpipe.tikz.ast import (
    DEFAULT_BOUNDING_BOX,
    DEFAULT_CANVAS_CM,
    DEFAULT_LINE_WIDTH_PT,
    CommandKind,
    ParseWarning,
    Point,
    Rect,
    SketchCommand,
    SketchProgram,
    Style,
)
from sketchpipe.tikz.errors import (
    InvalidNumber,
    MalformedCommand,
    MissingEnvironment,
    TikzError,
    UnsupportedConstruct,
    UnterminatedCoordinate,
    UnterminatedOptionList,
)
from sketchpipe.tikz.parser import parse
from sketchpipe.tikz.printer import pretty_print
from sketchpipe.tikz.tokens import Token, TokenKind, tokenize

__all__ = [
    "DEFAULT_BOUNDING_BOX",
    "DEFAULT_CANVAS_CM",
    "DEFAULT_LINE_WIDTH_PT",
    "CommandKind",
    "InvalidNumber",
    "MalformedCommand",
    "MissingEnvironment",
    "ParseWarning",
    "Point",
    "Rect",
    "SketchCommand",
    "SketchProgram",
    "Style",
    "TikzError",
    "Token",
    "TokenKind",
    "UnsupportedConstruct",
    "UnterminatedCoordinate",
    "UnterminatedOptionList",
    "parse",
    "pretty_print",
    "tokenize",
]

"""Error types raised while lexing or parsing sketch source."""

from __future__ import annotations

from sketchpipe.errors import SketchPipeError


class TikzError(SketchPipeError):
    """Base class for lexer and parser failures."""

    code = "TikzError"


class UnterminatedOptionList(TikzError):
    """An option list ``[...]`` is missing its closing bracket."""

    code = "UnterminatedOptionList"


class UnterminatedCoordinate(TikzError):
    """A parenthesised group ``(...)`` is missing its closing paren."""

    code = "UnterminatedCoordinate"


class InvalidNumber(TikzError):
    """A numeric literal could not be parsed."""

    code = "InvalidNumber"


class MissingEnvironment(TikzError):
    """No complete ``tikzpicture`` environment was found in the source."""

    code = "MissingEnvironment"


class MalformedCommand(TikzError):
    """A statement inside the environment does not fit the dialect grammar."""

    code = "MalformedCommand"


class UnsupportedConstruct(TikzError):
    """A recognised TikZ construct that is outside the supported subset."""

    code = "UnsupportedConstruct"

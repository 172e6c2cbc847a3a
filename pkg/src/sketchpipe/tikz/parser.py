"""Parser from sketch source to :class:`SketchProgram`.

The entry point is total over arbitrary text in the sense that it either
returns a program or raises a structured ``TikzError`` with a source location;
it never lets unrelated exceptions escape.  Text before and after the first
``tikzpicture`` environment (e.g. prose or a LaTeX preamble) is ignored.
"""

from __future__ import annotations

import re

from sketchpipe.tikz.ast import (
    DEFAULT_BOUNDING_BOX,
    DEFAULT_LINE_WIDTH_PT,
    SOFT_COORD_MAX,
    SOFT_COORD_MIN,
    CommandKind,
    ParseWarning,
    Point,
    Rect,
    SketchCommand,
    SketchProgram,
    Style,
)
from sketchpipe.tikz.errors import (
    MalformedCommand,
    MissingEnvironment,
    UnsupportedConstruct,
)
from sketchpipe.tikz.tokens import PT_PER_CM, Token, TokenKind, tokenize

_BEGIN_RE = re.compile(r"\\begin\s*\{tikzpicture\}")
_END_RE = re.compile(r"\\end\s*\{tikzpicture\}")
_IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9!_\-]*")
_LENGTH_OPT_RE = re.compile(r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*(pt|cm)?\s*")

_BBOX_FLAG = "use as bounding box"


def _line_col(text: str, index: int) -> tuple[int, int]:
    line = text.count("\n", 0, index) + 1
    last_nl = text.rfind("\n", 0, index)
    return line, index - last_nl


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.warnings: list[ParseWarning] = []
        self.bounding_box: Rect | None = None
        self.commands: list[SketchCommand] = []

    # -- token helpers ---------------------------------------------------

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def expect(self, kind: TokenKind, what: str) -> Token:
        tok = self.next()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise MalformedCommand(
                f"expected {what}, found end of input",
                line=last.line if last else None,
                column=last.column if last else None,
            )
        if tok.kind is not kind:
            raise MalformedCommand(
                f"expected {what}, found {tok.text!r}", line=tok.line, column=tok.column
            )
        return tok

    def warn(self, message: str, tok: Token | None = None) -> None:
        self.warnings.append(
            ParseWarning(message, tok.line if tok else None, tok.column if tok else None)
        )

    # -- option lists ----------------------------------------------------

    def parse_style(self, tok: Token | None, mode: str) -> tuple[Style, bool]:
        """Interpret an OPTIONS token (or None) for a \\fill or \\draw command.

        Returns the style and whether the bounding-box flag was present.  A
        bare identifier is a colour; in fill mode it sets the fill colour, in
        draw mode the stroke colour.  Unknown keys produce warnings, not
        errors.
        """
        stroke: str | None = None
        fill: str | None = None
        width: float | None = None
        bbox_flag = False
        if tok is not None:
            for item in tok.value.split(","):
                item = item.strip()
                if not item:
                    continue
                if "=" in item:
                    key, _, value = item.partition("=")
                    key = " ".join(key.split())
                    value = value.strip()
                    if key == "fill":
                        if _IDENT_RE.fullmatch(value):
                            if fill is None:
                                fill = value
                            else:
                                self.warn(f"duplicate fill colour {value!r} ignored", tok)
                        else:
                            raise MalformedCommand(
                                f"invalid fill colour {value!r}", line=tok.line, column=tok.column
                            )
                    elif key == "draw":
                        if _IDENT_RE.fullmatch(value):
                            if stroke is None:
                                stroke = value
                            else:
                                self.warn(f"duplicate stroke colour {value!r} ignored", tok)
                        else:
                            raise MalformedCommand(
                                f"invalid stroke colour {value!r}", line=tok.line, column=tok.column
                            )
                    elif key == "line width":
                        m = _LENGTH_OPT_RE.fullmatch(value)
                        if m is None:
                            raise MalformedCommand(
                                f"invalid line width {value!r}", line=tok.line, column=tok.column
                            )
                        width = float(m.group(1))
                        if m.group(2) == "cm":
                            width *= PT_PER_CM
                        if width <= 0:
                            raise MalformedCommand(
                                f"line width must be positive, got {value!r}",
                                line=tok.line,
                                column=tok.column,
                            )
                    else:
                        self.warn(f"unknown option key {key!r} ignored", tok)
                elif " ".join(item.split()) == _BBOX_FLAG:
                    bbox_flag = True
                elif _IDENT_RE.fullmatch(item):
                    if mode == "fill":
                        if fill is None:
                            fill = item
                        else:
                            self.warn(f"extra colour option {item!r} ignored", tok)
                    elif mode == "draw":
                        if stroke is None:
                            stroke = item
                        else:
                            self.warn(f"extra colour option {item!r} ignored", tok)
                    else:
                        self.warn(f"option {item!r} ignored on \\path", tok)
                else:
                    self.warn(f"unrecognised option {item!r} ignored", tok)
        # TikZ paints with black when no colour is named.
        if mode == "fill" and fill is None:
            fill = "black"
        if mode == "draw" and stroke is None:
            stroke = "black"
        style = Style(
            stroke_color=stroke,
            fill_color=fill,
            line_width=width if width is not None else DEFAULT_LINE_WIDTH_PT,
        )
        return style, bbox_flag

    # -- coordinates -----------------------------------------------------

    def read_point(self, tok: Token) -> Point:
        x, y = tok.value
        if not (SOFT_COORD_MIN <= x <= SOFT_COORD_MAX and SOFT_COORD_MIN <= y <= SOFT_COORD_MAX):
            self.warn(f"coordinate ({x:g},{y:g}) is far outside the canvas", tok)
        return Point(x, y)

    def expect_coord(self, what: str = "a coordinate") -> Token:
        tok = self.next()
        if tok is None:
            raise MalformedCommand(f"expected {what}, found end of input")
        if tok.kind is TokenKind.DOTDOT:
            raise UnsupportedConstruct(
                "curve operations ('..') are outside the dialect", line=tok.line, column=tok.column
            )
        if tok.kind is not TokenKind.COORD:
            raise MalformedCommand(
                f"expected {what}, found {tok.text!r}", line=tok.line, column=tok.column
            )
        return tok

    # -- statements ------------------------------------------------------

    def set_bounding_box(self, a: Point, b: Point, tok: Token) -> None:
        if self.bounding_box is not None:
            raise MalformedCommand(
                "bounding box declared more than once", line=tok.line, column=tok.column
            )
        self.bounding_box = Rect(a.x, a.y, b.x, b.y)

    def parse_bbox_body(self, start: Token) -> None:
        a = self.read_point(self.expect_coord())
        self.expect(TokenKind.RECTANGLE, "'rectangle'")
        b = self.read_point(self.expect_coord())
        self.expect(TokenKind.SEMICOLON, "';'")
        self.set_bounding_box(a, b, start)

    def parse_path_statement(self, start: Token) -> None:
        opts = None
        if self.peek() is not None and self.peek().kind is TokenKind.OPTIONS:
            opts = self.next()
        _, bbox_flag = self.parse_style(opts, mode="path")
        if bbox_flag:
            self.parse_bbox_body(start)
            return
        self.warn("\\path command without 'use as bounding box' ignored", start)
        self.skip_statement()

    def skip_statement(self) -> None:
        while True:
            tok = self.next()
            if tok is None or tok.kind is TokenKind.SEMICOLON:
                return

    def parse_draw_statement(self, start: Token, mode: str) -> None:
        opts = None
        if self.peek() is not None and self.peek().kind is TokenKind.OPTIONS:
            opts = self.next()
        style, bbox_flag = self.parse_style(opts, mode=mode)
        if bbox_flag:
            self.warn("'use as bounding box' outside \\path treated as bounding box", start)
            self.parse_bbox_body(start)
            return
        span = (start.line, start.column)

        first_tok = self.next()
        if first_tok is None:
            raise MalformedCommand("expected a coordinate, found end of input")
        if first_tok.kind is TokenKind.NAME:
            raise UnsupportedConstruct(
                f"construct {first_tok.text!r} is outside the dialect",
                line=first_tok.line,
                column=first_tok.column,
            )
        if first_tok.kind is not TokenKind.COORD:
            raise MalformedCommand(
                f"expected a coordinate, found {first_tok.text!r}",
                line=first_tok.line,
                column=first_tok.column,
            )
        first = self.read_point(first_tok)

        nxt = self.next()
        if nxt is None:
            raise MalformedCommand("unterminated path, expected ';'")
        if nxt.kind is TokenKind.CIRCLE:
            radius_tok = self.next()
            if radius_tok is None or radius_tok.kind is not TokenKind.LENGTH:
                raise MalformedCommand(
                    "circle requires a radius in parentheses",
                    line=(radius_tok or nxt).line,
                    column=(radius_tok or nxt).column,
                )
            radius = radius_tok.value
            if radius <= 0:
                raise MalformedCommand(
                    f"circle radius must be positive, got {radius:g}",
                    line=radius_tok.line,
                    column=radius_tok.column,
                )
            self.expect(TokenKind.SEMICOLON, "';'")
            if style.fill_color is None:
                raise UnsupportedConstruct(
                    "stroke-only circles are outside the dialect; add a fill colour",
                    line=start.line,
                    column=start.column,
                )
            self.commands.append(
                SketchCommand(CommandKind.FILL_CIRCLE, (first,), style, radius=radius, span=span)
            )
            return
        if nxt.kind is TokenKind.RECTANGLE:
            other = self.read_point(self.expect_coord("the opposite corner"))
            self.expect(TokenKind.SEMICOLON, "';'")
            if style.fill_color is None:
                raise UnsupportedConstruct(
                    "stroke-only rectangles are outside the dialect; add a fill colour",
                    line=start.line,
                    column=start.column,
                )
            self.commands.append(
                SketchCommand(CommandKind.FILL_RECT, (first, other), style, span=span)
            )
            return
        if nxt.kind is not TokenKind.DASHDASH:
            if nxt.kind is TokenKind.DOTDOT:
                raise UnsupportedConstruct(
                    "curve operations ('..') are outside the dialect",
                    line=nxt.line,
                    column=nxt.column,
                )
            raise MalformedCommand(
                f"expected 'circle', 'rectangle' or '--', found {nxt.text!r}",
                line=nxt.line,
                column=nxt.column,
            )

        points = [first]
        closed = False
        while True:
            seg = self.next()
            if seg is None:
                raise MalformedCommand("unterminated path, expected ';'")
            if seg.kind is TokenKind.CYCLE:
                closed = True
                self.expect(TokenKind.SEMICOLON, "';'")
                break
            if seg.kind is TokenKind.DOTDOT:
                raise UnsupportedConstruct(
                    "curve operations ('..') are outside the dialect",
                    line=seg.line,
                    column=seg.column,
                )
            if seg.kind is not TokenKind.COORD:
                raise MalformedCommand(
                    f"expected a coordinate or 'cycle', found {seg.text!r}",
                    line=seg.line,
                    column=seg.column,
                )
            points.append(self.read_point(seg))
            nxt = self.next()
            if nxt is None:
                raise MalformedCommand("unterminated path, expected ';'")
            if nxt.kind is TokenKind.SEMICOLON:
                break
            if nxt.kind is TokenKind.DOTDOT:
                raise UnsupportedConstruct(
                    "curve operations ('..') are outside the dialect",
                    line=nxt.line,
                    column=nxt.column,
                )
            if nxt.kind is not TokenKind.DASHDASH:
                raise MalformedCommand(
                    f"expected '--' or ';', found {nxt.text!r}", line=nxt.line, column=nxt.column
                )

        if closed:
            if len(points) < 3:
                raise MalformedCommand(
                    "closed path needs at least three vertices", line=start.line, column=start.column
                )
            if style.fill_color is not None:
                kind = CommandKind.FILL_POLYGON
            else:
                kind = CommandKind.STROKE_POLYGON
            self.commands.append(SketchCommand(kind, tuple(points), style, span=span))
            return
        # Open path: only strokes make sense.
        if mode == "fill":
            raise MalformedCommand(
                "\\fill path must close with 'cycle'", line=start.line, column=start.column
            )
        if style.fill_color is not None:
            self.warn("fill colour on an open path ignored", start)
            style = Style(
                stroke_color=style.stroke_color, fill_color=None, line_width=style.line_width
            )
        self.commands.append(
            SketchCommand(CommandKind.STROKE_POLYLINE, tuple(points), style, span=span)
        )

    def parse_body(self) -> None:
        while True:
            tok = self.next()
            if tok is None:
                raise MalformedCommand("missing \\end{tikzpicture}")
            kind = tok.kind
            if kind is TokenKind.END:
                return
            if kind is TokenKind.SEMICOLON:
                continue  # stray empty statement
            if kind is TokenKind.USE_BBOX:
                self.parse_bbox_body(tok)
            elif kind is TokenKind.PATH:
                self.parse_path_statement(tok)
            elif kind is TokenKind.FILL:
                self.parse_draw_statement(tok, mode="fill")
            elif kind is TokenKind.DRAW:
                self.parse_draw_statement(tok, mode="draw")
            elif kind in (TokenKind.COMMAND, TokenKind.NAME):
                raise UnsupportedConstruct(
                    f"construct {tok.text!r} is outside the dialect",
                    line=tok.line,
                    column=tok.column,
                )
            else:
                raise MalformedCommand(
                    f"unexpected {tok.text!r} at statement level", line=tok.line, column=tok.column
                )


def parse(source: str) -> SketchProgram:
    """Parse the first ``tikzpicture`` environment in ``source``.

    Surrounding text is ignored, which lets complete LLM responses be fed in
    directly.  Raises :class:`MissingEnvironment` when no complete environment
    exists, and other ``TikzError`` subclasses for lexical or grammatical
    problems inside it.
    """
    begin = _BEGIN_RE.search(source)
    if begin is None:
        raise MissingEnvironment("no \\begin{tikzpicture} found")
    end = _END_RE.search(source, begin.end())
    if end is None:
        line, col = _line_col(source, begin.start())
        raise MissingEnvironment("missing \\end{tikzpicture}", line=line, column=col)
    line, col = _line_col(source, begin.start())
    tokens = tokenize(source[begin.start() : end.end()], start_line=line, start_column=col)

    parser = _Parser(tokens)
    first = parser.next()
    if first is None or first.kind is not TokenKind.BEGIN:  # pragma: no cover - regex guarantees
        raise MissingEnvironment("no \\begin{tikzpicture} found")
    if parser.peek() is not None and parser.peek().kind is TokenKind.OPTIONS:
        opts = parser.next()
        if opts.value.strip():
            parser.warn(f"environment options {opts.value!r} ignored", opts)
    parser.parse_body()

    program = SketchProgram(
        bounding_box=parser.bounding_box if parser.bounding_box is not None else DEFAULT_BOUNDING_BOX,
        commands=parser.commands,
        warnings=parser.warnings,
        bounding_box_explicit=parser.bounding_box is not None,
    )
    if parser.bounding_box is None:
        program.warnings.append(
            ParseWarning("no bounding box declared; using the default 5.12 cm canvas")
        )
    if not parser.commands:
        program.warnings.append(ParseWarning("program has no drawable commands"))
    program.validate()
    return program

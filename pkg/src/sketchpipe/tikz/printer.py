"""Canonical text emission for sketch programs.

``parse(pretty_print(p))`` is structurally identical to ``p`` for any valid
program; the formatter is the normal form used by golden tests.
"""

from __future__ import annotations

from sketchpipe.tikz.ast import (
    DEFAULT_LINE_WIDTH_PT,
    CommandKind,
    Point,
    SketchCommand,
    SketchProgram,
)


def _num(v: float) -> str:
    # Integral values print without a decimal point; everything else uses
    # repr, whose shortest-round-trip output reparses to the same float.
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _point(p: Point) -> str:
    return f"({_num(p.x)},{_num(p.y)})"


def _options(cmd: SketchCommand) -> str:
    style = cmd.style
    parts: list[str] = []
    if style.stroke_color is not None:
        parts.append(style.stroke_color)
        if style.fill_color is not None:
            parts.append(f"fill={style.fill_color}")
    else:
        parts.append(style.fill_color)
    if style.line_width != DEFAULT_LINE_WIDTH_PT:
        parts.append(f"line width={_num(style.line_width)}pt")
    return "[" + ", ".join(parts) + "]"


def _command(cmd: SketchCommand) -> str:
    head = "\\draw" if cmd.style.stroke_color is not None else "\\fill"
    opts = _options(cmd)
    if cmd.kind is CommandKind.FILL_CIRCLE:
        body = f"{_point(cmd.points[0])} circle ({_num(cmd.radius)})"
    elif cmd.kind is CommandKind.FILL_RECT:
        body = f"{_point(cmd.points[0])} rectangle {_point(cmd.points[1])}"
    else:
        body = " -- ".join(_point(p) for p in cmd.points)
        if cmd.kind in (CommandKind.FILL_POLYGON, CommandKind.STROKE_POLYGON):
            body += " -- cycle"
    return f"{head}{opts} {body};"


def pretty_print(program: SketchProgram) -> str:
    """Emit canonical sketch text for a valid program."""
    program.validate()
    bbox = program.bounding_box
    lines = ["\\begin{tikzpicture}"]
    lines.append(
        "\\useasboundingbox "
        f"({_num(bbox.x0)},{_num(bbox.y0)}) rectangle ({_num(bbox.x1)},{_num(bbox.y1)});"
    )
    lines.extend(_command(cmd) for cmd in program.commands)
    lines.append("\\end{tikzpicture}")
    return "\n".join(lines) + "\n"

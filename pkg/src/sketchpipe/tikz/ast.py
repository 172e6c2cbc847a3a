"""AST for the sketch dialect.

A program is a bounding box plus an ordered list of drawable commands.  All
coordinates are in centimetres with the y axis pointing up, matching the
source text.  The canvas contract used throughout the toolchain is a
5.12 cm square.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

DEFAULT_CANVAS_CM = 5.12
DEFAULT_LINE_WIDTH_PT = 0.4

# Coordinates outside this soft range are legal but trigger a warning; they
# usually indicate the generator ignored the canvas instruction.
SOFT_COORD_MIN = -1.0
SOFT_COORD_MAX = DEFAULT_CANVAS_CM + 1.0


@dataclass(frozen=True)
class Point:
    """A 2-D point in sketch centimetres (y up)."""

    x: float
    y: float

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle given by two opposite corners."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def min_x(self) -> float:
        return min(self.x0, self.x1)

    @property
    def min_y(self) -> float:
        return min(self.y0, self.y1)

    @property
    def width(self) -> float:
        return abs(self.x1 - self.x0)

    @property
    def height(self) -> float:
        return abs(self.y1 - self.y0)


DEFAULT_BOUNDING_BOX = Rect(0.0, 0.0, DEFAULT_CANVAS_CM, DEFAULT_CANVAS_CM)


class CommandKind(Enum):
    FILL_CIRCLE = "FillCircle"
    FILL_RECT = "FillRect"
    FILL_POLYGON = "FillPolygon"
    STROKE_POLYLINE = "StrokePolyline"
    STROKE_POLYGON = "StrokePolygon"


FILL_KINDS = frozenset({CommandKind.FILL_CIRCLE, CommandKind.FILL_RECT, CommandKind.FILL_POLYGON})
STROKE_KINDS = frozenset({CommandKind.STROKE_POLYLINE, CommandKind.STROKE_POLYGON})


@dataclass(frozen=True)
class Style:
    """Paint attributes attached to a command.

    ``line_width`` is in TeX points.  A drawable command must carry a fill
    colour, a stroke colour, or both.
    """

    stroke_color: str | None = None
    fill_color: str | None = None
    line_width: float = DEFAULT_LINE_WIDTH_PT


@dataclass(frozen=True)
class ParseWarning:
    """Non-fatal finding recorded during parsing."""

    message: str
    line: int | None = None
    column: int | None = None


@dataclass(frozen=True)
class SketchCommand:
    """One drawable primitive.

    ``points`` holds the circle centre, the two rectangle corners, or the
    polygon/polyline vertices.  ``radius`` is set only for circles (cm).
    ``span`` is the (line, column) of the statement start in the source and is
    excluded from equality so reformatted programs still compare equal.
    """

    kind: CommandKind
    points: tuple[Point, ...]
    style: Style
    radius: float | None = None
    span: tuple[int, int] | None = field(default=None, compare=False)

    def validate(self) -> None:
        """Raise ``ValueError`` when the command breaks a shape invariant."""
        for p in self.points:
            if not p.is_finite():
                raise ValueError(f"{self.kind.value}: non-finite coordinate {p}")
        if self.kind is CommandKind.FILL_CIRCLE:
            if len(self.points) != 1:
                raise ValueError("FillCircle requires exactly one centre point")
            if self.radius is None or not math.isfinite(self.radius) or self.radius <= 0:
                raise ValueError(f"FillCircle requires a positive finite radius, got {self.radius}")
        elif self.radius is not None:
            raise ValueError(f"{self.kind.value} must not carry a radius")
        if self.kind is CommandKind.FILL_RECT and len(self.points) != 2:
            raise ValueError("FillRect requires exactly two corner points")
        if self.kind in (CommandKind.FILL_POLYGON, CommandKind.STROKE_POLYGON) and len(self.points) < 3:
            raise ValueError(f"{self.kind.value} requires at least three vertices")
        if self.kind is CommandKind.STROKE_POLYLINE and len(self.points) < 2:
            raise ValueError("StrokePolyline requires at least two vertices")
        if self.kind in FILL_KINDS and self.style.fill_color is None:
            raise ValueError(f"{self.kind.value} requires a fill colour")
        if self.kind in STROKE_KINDS:
            if self.style.stroke_color is None:
                raise ValueError(f"{self.kind.value} requires a stroke colour")
            if self.style.fill_color is not None:
                raise ValueError(f"{self.kind.value} must not carry a fill colour")
        if self.style.stroke_color is None and self.style.fill_color is None:
            raise ValueError("command style must set a stroke or fill colour")
        if not math.isfinite(self.style.line_width) or self.style.line_width <= 0:
            raise ValueError(f"line width must be positive and finite, got {self.style.line_width}")


@dataclass
class SketchProgram:
    """A parsed sketch: bounding box plus drawable commands in source order."""

    bounding_box: Rect = DEFAULT_BOUNDING_BOX
    commands: list[SketchCommand] = field(default_factory=list)
    warnings: list[ParseWarning] = field(default_factory=list, compare=False)
    bounding_box_explicit: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        # Accept any iterable so tuple-built programs compare equal to parsed ones.
        self.commands = list(self.commands)
        self.warnings = list(self.warnings)

    @property
    def source_span_map(self) -> dict[int, tuple[int, int] | None]:
        """Command index -> (line, column) of the originating statement."""
        return {i: cmd.span for i, cmd in enumerate(self.commands)}

    def validate(self) -> None:
        # A zero-area bounding box is representable (the rasterizer rejects it);
        # only command-level invariants are checked here.
        for cmd in self.commands:
            cmd.validate()

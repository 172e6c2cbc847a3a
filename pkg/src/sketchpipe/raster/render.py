"""Rasterization of sketch programs and polygon annotation rings.

Conventions, fixed for determinism:

- ``scale`` pixels per sketch cm (default 100), canvas height = round(scale x
  bbox height).  TikZ y points up; image rows grow downward, so
  px_y = height - scale*y.
- A pixel (row r, col c) is inked by a fill iff its center (c+0.5, r+0.5)
  lies inside the polygon under the even-odd rule.  Horizontal edges are
  skipped and the [min_y, max_y) half-open rule makes shared vertices count
  once, so abutting polygons neither overlap nor leave gaps.
- Circles are tessellated to 64-gons before filling.
- Strokes are drawn as capsules (segment dilated by half the width) after
  snapping endpoints to pixel centers; width = max(1, round(pt * scale /
  28.3465)) px.

Everything is pure numpy + python arithmetic; identical inputs give
byte-identical bitmaps on any platform or thread count.
"""

from __future__ import annotations

import math

import numpy as np

from sketchpipe.errors import SketchPipeError
from sketchpipe.raster.bitmap import SketchBitmap
from sketchpipe.tikz.ast import CommandKind, SketchProgram

DEFAULT_SCALE = 100.0
PT_PER_CM = 28.3465
CIRCLE_SEGMENTS = 64


class EmptyCanvas(SketchPipeError):
    """The bounding box has zero area, so there is nothing to rasterize onto."""

    code = "EmptyCanvas"


def _rnd(v: float) -> int:
    # Python's round (banker's). Corpus coordinates sit on a 0.01 cm grid, so
    # scaled values land on integers and ties do not arise in practice.
    return int(round(v))


def _fill_polygon(mask: np.ndarray, pts: list[tuple[float, float]]) -> None:
    """Scanline even-odd fill of a polygon given in pixel coordinates."""
    if len(pts) < 3:
        return
    height, width = mask.shape
    px = np.array([p[0] for p in pts], dtype=np.float64)
    py = np.array([p[1] for p in pts], dtype=np.float64)
    qx = np.roll(px, -1)
    qy = np.roll(py, -1)
    keep = py != qy  # horizontal edges never cross a scanline center
    if not keep.any():
        return
    px, py, qx, qy = px[keep], py[keep], qx[keep], qy[keep]
    ymin = np.minimum(py, qy)
    ymax = np.maximum(py, qy)

    r_lo = max(0, int(math.floor(ymin.min() - 0.5)))
    r_hi = min(height - 1, int(math.ceil(ymax.max())))
    for r in range(r_lo, r_hi + 1):
        yc = r + 0.5
        sel = (ymin <= yc) & (yc < ymax)
        if not sel.any():
            continue
        t = (yc - py[sel]) / (qy[sel] - py[sel])
        xs = np.sort(px[sel] + t * (qx[sel] - px[sel]))
        for i in range(0, len(xs) - 1, 2):
            # Pixel centers c+0.5 in [x0, x1) <=> c in [ceil(x0-0.5), ceil(x1-0.5))
            c0 = max(0, math.ceil(xs[i] - 0.5))
            c1 = min(width, math.ceil(xs[i + 1] - 0.5))
            if c1 > c0:
                mask[r, c0:c1] = 1


def _snap_center(x: float, y: float) -> tuple[float, float]:
    # Nearest pixel center; floor keeps the choice deterministic when the
    # coordinate lies exactly between two centers.
    return math.floor(x) + 0.5, math.floor(y) + 0.5


def _ink(mask: np.ndarray, col: int, row: int) -> None:
    if 0 <= row < mask.shape[0] and 0 <= col < mask.shape[1]:
        mask[row, col] = 1


def _line_4connected(mask: np.ndarray, a: tuple[float, float], b: tuple[float, float]) -> None:
    """1-px line between two pixel centers that stays 4-connected.

    A capsule of radius 0.5 drops the off-diagonal neighbours of a diagonal
    run, which would shatter thin strokes under 4-connectivity labeling; this
    integer walk crosses cell borders one axis at a time instead.
    """
    ax, ay = _snap_center(*a)
    bx, by = _snap_center(*b)
    x, y = int(ax), int(ay)
    dx, dy = abs(int(bx) - x), abs(int(by) - y)
    sx = 1 if bx > ax else -1
    sy = 1 if by > ay else -1
    _ink(mask, x, y)
    ix = iy = 0
    while ix < dx or iy < dy:
        # Step along whichever axis crosses its next cell border first:
        # compare (ix+0.5)/dx with (iy+0.5)/dy in integer arithmetic.
        decision = (1 + 2 * ix) * dy - (1 + 2 * iy) * dx
        if decision < 0 or (decision == 0 and dx >= dy):
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        _ink(mask, x, y)


def _stamp_capsule(
    mask: np.ndarray, a: tuple[float, float], b: tuple[float, float], width_px: int
) -> None:
    """Ink all pixels whose center lies within width/2 of segment ab (round caps)."""
    if width_px <= 1:
        _line_4connected(mask, a, b)
        return
    height, width = mask.shape
    radius = width_px / 2.0
    ax, ay = _snap_center(*a)
    bx, by = _snap_center(*b)
    c_lo = max(0, int(math.floor(min(ax, bx) - radius - 1)))
    c_hi = min(width - 1, int(math.ceil(max(ax, bx) + radius + 1)))
    r_lo = max(0, int(math.floor(min(ay, by) - radius - 1)))
    r_hi = min(height - 1, int(math.ceil(max(ay, by) + radius + 1)))
    if c_lo > c_hi or r_lo > r_hi:
        return
    cols = np.arange(c_lo, c_hi + 1, dtype=np.float64) + 0.5
    rows = np.arange(r_lo, r_hi + 1, dtype=np.float64) + 0.5
    cx, cy = np.meshgrid(cols, rows)
    dx, dy = bx - ax, by - ay
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0.0:
        d2 = (cx - ax) ** 2 + (cy - ay) ** 2
    else:
        t = np.clip(((cx - ax) * dx + (cy - ay) * dy) / seg_len2, 0.0, 1.0)
        d2 = (cx - (ax + t * dx)) ** 2 + (cy - (ay + t * dy)) ** 2
    hit = d2 <= radius * radius
    region = mask[r_lo : r_hi + 1, c_lo : c_hi + 1]
    region[hit] = 1


def _stroke_width_px(line_width_pt: float, scale: float) -> int:
    return max(1, _rnd(line_width_pt * scale / PT_PER_CM))


def _circle_points(
    cx: float, cy: float, radius: float, to_px
) -> list[tuple[float, float]]:
    pts = []
    for k in range(CIRCLE_SEGMENTS):
        ang = 2.0 * math.pi * k / CIRCLE_SEGMENTS
        pts.append(to_px(cx + radius * math.cos(ang), cy + radius * math.sin(ang)))
    return pts


def rasterize(
    program: SketchProgram, scale: float = DEFAULT_SCALE, provenance: str = ""
) -> SketchBitmap:
    """Render a sketch program onto its bounding-box canvas.

    Raises :class:`EmptyCanvas` when the bounding box has zero area.  A
    program with no commands yields an all-zero bitmap plus a warning.
    """
    program.validate()
    bbox = program.bounding_box
    width = _rnd(scale * bbox.width)
    height = _rnd(scale * bbox.height)
    if width <= 0 or height <= 0:
        raise EmptyCanvas(
            f"bounding box {bbox.width:g} x {bbox.height:g} cm rasterizes to zero pixels"
        )
    ox, oy = bbox.min_x, bbox.min_y

    def to_px(x: float, y: float) -> tuple[float, float]:
        return scale * (x - ox), height - scale * (y - oy)

    mask = np.zeros((height, width), dtype=np.uint8)
    warnings: list[str] = []
    if not program.commands:
        warnings.append("EmptyCanvas: program has no drawable commands")

    for cmd in program.commands:
        style = cmd.style
        if cmd.kind is CommandKind.FILL_CIRCLE:
            centre = cmd.points[0]
            poly = _circle_points(centre.x, centre.y, cmd.radius, to_px)
            _fill_polygon(mask, poly)
            if style.stroke_color is not None:
                w = _stroke_width_px(style.line_width, scale)
                for i in range(len(poly)):
                    _stamp_capsule(mask, poly[i], poly[(i + 1) % len(poly)], w)
        elif cmd.kind is CommandKind.FILL_RECT:
            a, b = cmd.points
            # Rect fill bypasses the scanline path so the inked area is exactly
            # the product of the rounded side lengths for any in-canvas rect.
            fx0, fy0 = to_px(min(a.x, b.x), max(a.y, b.y))
            n_cols = _rnd(scale * abs(b.x - a.x))
            n_rows = _rnd(scale * abs(b.y - a.y))
            c0 = _rnd(fx0)
            r0 = _rnd(fy0)
            c_lo, c_hi = max(0, c0), min(width, c0 + n_cols)
            r_lo, r_hi = max(0, r0), min(height, r0 + n_rows)
            if c_hi > c_lo and r_hi > r_lo:
                mask[r_lo:r_hi, c_lo:c_hi] = 1
            if style.stroke_color is not None:
                w = _stroke_width_px(style.line_width, scale)
                corners = [
                    to_px(min(a.x, b.x), min(a.y, b.y)),
                    to_px(max(a.x, b.x), min(a.y, b.y)),
                    to_px(max(a.x, b.x), max(a.y, b.y)),
                    to_px(min(a.x, b.x), max(a.y, b.y)),
                ]
                for i in range(4):
                    _stamp_capsule(mask, corners[i], corners[(i + 1) % 4], w)
        else:
            pts = [to_px(p.x, p.y) for p in cmd.points]
            if cmd.kind is CommandKind.FILL_POLYGON:
                _fill_polygon(mask, pts)
            if style.stroke_color is not None:
                w = _stroke_width_px(style.line_width, scale)
                closed = cmd.kind in (CommandKind.FILL_POLYGON, CommandKind.STROKE_POLYGON)
                last = len(pts) if closed else len(pts) - 1
                for i in range(last):
                    _stamp_capsule(mask, pts[i], pts[(i + 1) % len(pts)], w)

    return SketchBitmap(pixels=mask, provenance=provenance, warnings=warnings)


def render_polygons(
    polygons: list[list[tuple[float, float]]],
    src_size: tuple[int, int],
    dst: int = 512,
    outline: bool = False,
    outline_width_px: int = 2,
    provenance: str = "",
) -> SketchBitmap:
    """Render annotation polygon rings into a letterboxed square sketch.

    Rings are in source-image pixel coordinates (y down, no flip).  They are
    scaled by s = dst/max(w, h) and centered with equal padding; aspect ratio
    is never stretched.  Each ring is filled independently under the even-odd
    rule (or stroked when ``outline`` is set); rings with fewer than 3
    distinct points are skipped with a warning.
    """
    src_w, src_h = src_size
    if src_w <= 0 or src_h <= 0:
        raise EmptyCanvas(f"source size {src_w} x {src_h} has no pixels")
    s = dst / max(src_w, src_h)
    pad_x = (dst - src_w * s) / 2.0
    pad_y = (dst - src_h * s) / 2.0

    mask = np.zeros((dst, dst), dtype=np.uint8)
    warnings: list[str] = []
    for idx, ring in enumerate(polygons):
        distinct = set((float(x), float(y)) for x, y in ring)
        if len(distinct) < 3:
            warnings.append(f"DegeneratePolygon: ring {idx} has fewer than 3 distinct points")
            continue
        pts = [(x * s + pad_x, y * s + pad_y) for x, y in ring]
        if outline:
            for i in range(len(pts)):
                _stamp_capsule(mask, pts[i], pts[(i + 1) % len(pts)], outline_width_px)
        else:
            _fill_polygon(mask, pts)
    return SketchBitmap(pixels=mask, provenance=provenance, warnings=warnings)

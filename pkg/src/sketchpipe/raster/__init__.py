"""Deterministic binary rasterization, component labeling and matching."""

from sketchpipe.raster.bitmap import SketchBitmap
from sketchpipe.raster.components import (
    Component,
    ComponentSet,
    GroundingMatch,
    label_components,
    match_components,
)
from sketchpipe.raster.render import (
    DEFAULT_SCALE,
    EmptyCanvas,
    rasterize,
    render_polygons,
)

__all__ = [
    "Component",
    "ComponentSet",
    "DEFAULT_SCALE",
    "EmptyCanvas",
    "GroundingMatch",
    "SketchBitmap",
    "label_components",
    "match_components",
    "rasterize",
    "render_polygons",
]

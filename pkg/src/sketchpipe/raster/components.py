"""Connected-component labeling and grounding-to-component matching."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from sketchpipe.raster.bitmap import SketchBitmap
from sketchpipe.raster.render import DEFAULT_SCALE

# 4-connectivity: diagonal ink does not join components.
_STRUCTURE = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class Component:
    """One connected ink region; centroid in (x, y) image coords, y down."""

    id: int
    area_px: int
    centroid_px: tuple[float, float]
    bbox_px: tuple[int, int, int, int]  # x, y, w, h


@dataclass
class ComponentSet:
    labels: np.ndarray  # per-pixel component id, 0 = background
    components: list[Component]

    @property
    def count(self) -> int:
        return len(self.components)


def label_components(bitmap: SketchBitmap) -> ComponentSet:
    """Label 4-connected ink regions; ids are assigned in scan order from 1."""
    labels, n = ndimage.label(bitmap.pixels, structure=_STRUCTURE)
    components: list[Component] = []
    if n:
        areas = np.bincount(labels.ravel())
        slices = ndimage.find_objects(labels)
        for cid in range(1, n + 1):
            rows, cols = np.nonzero(labels == cid)
            # Pixel-center convention keeps centroids consistent with the
            # rasterizer's inside test.
            cx = float(cols.mean() + 0.5)
            cy = float(rows.mean() + 0.5)
            sl = slices[cid - 1]
            bbox = (
                int(sl[1].start),
                int(sl[0].start),
                int(sl[1].stop - sl[1].start),
                int(sl[0].stop - sl[0].start),
            )
            components.append(
                Component(id=cid, area_px=int(areas[cid]), centroid_px=(cx, cy), bbox_px=bbox)
            )
    return ComponentSet(labels=labels, components=components)


@dataclass(frozen=True)
class GroundingMatch:
    """Assignment of one grounding to a component (or none)."""

    name: str
    component_id: int | None
    distance_px: float


def match_components(
    component_set: ComponentSet,
    groundings,
    scale: float = DEFAULT_SCALE,
) -> list[GroundingMatch]:
    """Greedily match groundings (in list order) to nearest unused components.

    Grounding centers are in sketch cm (y up); they are scaled and y-flipped
    into the component image frame.  Unmatched groundings get component_id
    None and infinite distance.  Ties on distance go to the lower component
    id, and earlier groundings pick first (list-order tie-break).
    """
    height = int(component_set.labels.shape[0])
    available = {c.id: c for c in component_set.components}
    matches: list[GroundingMatch] = []
    for entry in groundings.entries:
        tx = scale * entry.center.x
        ty = height - scale * entry.center.y
        best_id = None
        best_d = math.inf
        for cid in sorted(available):
            cx, cy = available[cid].centroid_px
            d = math.hypot(cx - tx, cy - ty)
            if d < best_d:
                best_d = d
                best_id = cid
        if best_id is None:
            matches.append(GroundingMatch(entry.name, None, math.inf))
        else:
            del available[best_id]
            matches.append(GroundingMatch(entry.name, best_id, best_d))
    return matches

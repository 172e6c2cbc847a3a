"""Position and size scoring with a tolerance proportional to the canvas.

Targets come from the ground truth's per-object placement spec, given in
centimeters with y up.  They are converted to pixels with the canvas scale
(100 px per cm) and a y flip, then compared to the best matching detection
per object.  A coordinate is accepted when it deviates by at most
``eps_frac * canvas`` pixels; sizes are compared per dimension, positions per
axis by default or by Euclidean distance behind a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from sketchpipe.errors import SketchPipeError
from sketchpipe.metrics.records import (
    CANVAS_PX,
    DetectionRecord,
    ObjectTarget,
    PromptGroundTruth,
    RecordError,
)
from sketchpipe.metrics.visor import DEFAULT_SCORE_THRESHOLD, best_detection

DEFAULT_EPS_FRAC = 0.039
CM_TO_PX = 100.0


class MissingSpec(SketchPipeError):
    code = "metrics.missing_spec"


def target_px(target: ObjectTarget, canvas: int = CANVAS_PX) -> tuple[tuple[float, float], tuple[float, float]]:
    """(center, size) in pixels, y flipped so the origin sits top-left."""
    cx, cy = target.center_cm
    sw, sh = target.size_cm
    return ((cx * CM_TO_PX, canvas - cy * CM_TO_PX), (sw * CM_TO_PX, sh * CM_TO_PX))


@dataclass(frozen=True)
class ObjectScore:
    detected: bool
    pos_ok: bool
    size_ok: bool


@dataclass(frozen=True)
class PositionSizeCounts:
    images: int
    obj1_pos: int
    obj1_size: int
    obj2_pos: int
    obj2_size: int
    all_pos: int
    all_size: int
    pos_and_size: int

    def _rate(self, n: int) -> float:
        return n / self.images if self.images else math.nan

    @property
    def rates(self) -> dict[str, float]:
        return {
            "Obj1 Pos": self._rate(self.obj1_pos),
            "Obj1 Size": self._rate(self.obj1_size),
            "Obj2 Pos": self._rate(self.obj2_pos),
            "Obj2 Size": self._rate(self.obj2_size),
            "All Pos": self._rate(self.all_pos),
            "All Size": self._rate(self.all_size),
            "Pos & Size": self._rate(self.pos_and_size),
        }


def score_object(
    rec: DetectionRecord,
    name: str,
    target: ObjectTarget,
    tol_px: float,
    canvas: int = CANVAS_PX,
    euclidean: bool = False,
    thresh: float = DEFAULT_SCORE_THRESHOLD,
) -> ObjectScore:
    det = best_detection(rec.detections, name, thresh)
    if det is None:
        return ObjectScore(False, False, False)
    (tx, ty), (tw, th) = target_px(target, canvas)
    cx, cy = det.center
    if euclidean:
        pos_ok = math.hypot(cx - tx, cy - ty) <= tol_px
    else:
        pos_ok = abs(cx - tx) <= tol_px and abs(cy - ty) <= tol_px
    _, _, w, h = det.bbox_px
    size_ok = abs(w - tw) <= tol_px and abs(h - th) <= tol_px
    return ObjectScore(True, pos_ok, size_ok)


def position_size(
    records: list[DetectionRecord],
    gts: dict[str, PromptGroundTruth],
    eps_frac: float = DEFAULT_EPS_FRAC,
    canvas: int = CANVAS_PX,
    euclidean: bool = False,
    thresh: float = DEFAULT_SCORE_THRESHOLD,
) -> PositionSizeCounts:
    if eps_frac < 0:
        raise ValueError(f"eps_frac must be non-negative, got {eps_frac}")
    tol_px = eps_frac * canvas
    counts = [0] * 7
    for rec in records:
        gt = gts.get(rec.prompt_id)
        if gt is None:
            raise RecordError(f"record references unknown prompt {rec.prompt_id!r}")
        if gt.spec is None:
            raise MissingSpec(f"prompt {gt.prompt_id!r} has no position/size spec")
        s1 = score_object(rec, gt.object_a, gt.spec[0], tol_px, canvas, euclidean, thresh)
        s2 = score_object(rec, gt.object_b, gt.spec[1], tol_px, canvas, euclidean, thresh)
        counts[0] += s1.pos_ok
        counts[1] += s1.size_ok
        counts[2] += s2.pos_ok
        counts[3] += s2.size_ok
        counts[4] += s1.pos_ok and s2.pos_ok
        counts[5] += s1.size_ok and s2.size_ok
        counts[6] += s1.pos_ok and s1.size_ok and s2.pos_ok and s2.size_ok
    return PositionSizeCounts(len(records), *counts)


def merge_position_size(parts: list[PositionSizeCounts]) -> PositionSizeCounts:
    if not parts:
        raise ValueError("nothing to merge")
    return PositionSizeCounts(
        images=sum(p.images for p in parts),
        obj1_pos=sum(p.obj1_pos for p in parts),
        obj1_size=sum(p.obj1_size for p in parts),
        obj2_pos=sum(p.obj2_pos for p in parts),
        obj2_size=sum(p.obj2_size for p in parts),
        all_pos=sum(p.all_pos for p in parts),
        all_size=sum(p.all_size for p in parts),
        pos_and_size=sum(p.pos_and_size for p in parts),
    )

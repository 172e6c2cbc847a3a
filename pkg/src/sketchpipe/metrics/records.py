"""Detection and ground-truth records for the evaluation metrics.

Detections arrive as JSONL, one image per line:

    {"prompt_id": "p1", "sample_index": 0,
     "detections": [{"label": "dog", "score": 0.9, "bbox": [10, 20, 50, 40]}]}

Ground truth is JSONL keyed by prompt:

    {"prompt_id": "p1", "object_a": "dog", "object_b": "cat",
     "relation": "left",
     "spec": {"object_a": {"center": [1.5, 2.5], "size": [1.0, 1.0]},
              "object_b": {"center": [4.0, 2.5], "size": [0.8, 1.2]}}}

``spec`` is optional and in canvas centimeters; everything else is pixels in a
square image (default 512).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from sketchpipe.errors import IoError, SketchPipeError

CANVAS_PX = 512
RELATIONS = ("left", "right", "above", "below")


class RecordError(SketchPipeError):
    code = "metrics.record"


def normalize_label(label: str) -> str:
    return label.strip().lower()


@dataclass(frozen=True)
class Detection:
    label: str
    score: float
    bbox_px: tuple[float, float, float, float]  # x, y, w, h; y grows downward

    @property
    def center(self) -> tuple[float, float]:
        x, y, w, h = self.bbox_px
        return (x + w / 2.0, y + h / 2.0)

    def clamped(self, canvas: int = CANVAS_PX) -> "Detection":
        x, y, w, h = self.bbox_px
        x0 = min(max(x, 0.0), float(canvas))
        y0 = min(max(y, 0.0), float(canvas))
        x1 = min(max(x + w, 0.0), float(canvas))
        y1 = min(max(y + h, 0.0), float(canvas))
        return Detection(self.label, self.score, (x0, y0, max(x1 - x0, 0.0), max(y1 - y0, 0.0)))


@dataclass(frozen=True)
class DetectionRecord:
    prompt_id: str
    sample_index: int
    detections: tuple[Detection, ...]


@dataclass(frozen=True)
class ObjectTarget:
    """Expected placement of one object, in centimeters (y up)."""

    center_cm: tuple[float, float]
    size_cm: tuple[float, float]


@dataclass(frozen=True)
class PromptGroundTruth:
    prompt_id: str
    object_a: str
    object_b: str
    relation: str
    spec: tuple[ObjectTarget, ObjectTarget] | None = None

    def validate(self) -> None:
        if self.relation not in RELATIONS:
            raise RecordError(
                f"prompt {self.prompt_id!r}: relation must be one of {RELATIONS}, got {self.relation!r}"
            )
        if normalize_label(self.object_a) == normalize_label(self.object_b):
            raise RecordError(f"prompt {self.prompt_id!r}: relation objects must be distinct")
        if not self.object_a.strip() or not self.object_b.strip():
            raise RecordError(f"prompt {self.prompt_id!r}: object names must be non-empty")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise RecordError(f"{where}: missing required field {key!r}")
    return obj[key]


def _num(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise RecordError(f"{where}: expected a finite number, got {value!r}")
    return float(value)


def _detection_from_obj(obj: dict, where: str, canvas: int) -> Detection:
    label = _require(obj, "label", where)
    if not isinstance(label, str) or not label.strip():
        raise RecordError(f"{where}: label must be a non-empty string")
    score = _num(_require(obj, "score", where), f"{where}.score")
    if not 0.0 <= score <= 1.0:
        raise RecordError(f"{where}: score must lie in [0, 1], got {score}")
    bbox = _require(obj, "bbox", where)
    if not isinstance(bbox, list) or len(bbox) != 4:
        raise RecordError(f"{where}: bbox must be [x, y, w, h]")
    x, y, w, h = (_num(v, f"{where}.bbox[{i}]") for i, v in enumerate(bbox))
    if w < 0 or h < 0:
        raise RecordError(f"{where}: bbox width/height must be non-negative")
    return Detection(label, score, (x, y, w, h)).clamped(canvas)


def _iter_jsonl(path: str | Path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"{path}:{lineno}: invalid JSON: {exc}", line=lineno) from exc
        if not isinstance(obj, dict):
            raise RecordError(f"{path}:{lineno}: expected an object per line", line=lineno)
        yield lineno, obj


def load_detections(path: str | Path, canvas: int = CANVAS_PX) -> list[DetectionRecord]:
    records = []
    seen: set[tuple[str, int]] = set()
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        prompt_id = str(_require(obj, "prompt_id", where))
        sample_index = _require(obj, "sample_index", where)
        if isinstance(sample_index, bool) or not isinstance(sample_index, int) or sample_index < 0:
            raise RecordError(f"{where}: sample_index must be a non-negative integer")
        dets = _require(obj, "detections", where)
        if not isinstance(dets, list):
            raise RecordError(f"{where}: detections must be a list")
        key = (prompt_id, sample_index)
        if key in seen:
            raise RecordError(f"{where}: duplicate record for prompt {prompt_id!r} sample {sample_index}")
        seen.add(key)
        records.append(
            DetectionRecord(
                prompt_id=prompt_id,
                sample_index=sample_index,
                detections=tuple(
                    _detection_from_obj(d, f"{where}.detections[{i}]", canvas)
                    for i, d in enumerate(dets)
                ),
            )
        )
    return records


def _target_from_obj(obj, where: str) -> ObjectTarget:
    if not isinstance(obj, dict):
        raise RecordError(f"{where}: expected an object with center and size")
    center = _require(obj, "center", where)
    size = _require(obj, "size", where)
    for name, pair in (("center", center), ("size", size)):
        if not isinstance(pair, list) or len(pair) != 2:
            raise RecordError(f"{where}.{name}: expected [x, y]")
    cx, cy = (_num(v, f"{where}.center") for v in center)
    sw, sh = (_num(v, f"{where}.size") for v in size)
    return ObjectTarget(center_cm=(cx, cy), size_cm=(sw, sh))


def load_ground_truth(path: str | Path) -> dict[str, PromptGroundTruth]:
    gts: dict[str, PromptGroundTruth] = {}
    for lineno, obj in _iter_jsonl(path):
        where = f"{path}:{lineno}"
        prompt_id = str(_require(obj, "prompt_id", where))
        if prompt_id in gts:
            raise RecordError(f"{where}: duplicate ground truth for prompt {prompt_id!r}")
        spec = None
        if obj.get("spec") is not None:
            raw = obj["spec"]
            if not isinstance(raw, dict):
                raise RecordError(f"{where}.spec: expected an object")
            spec = (
                _target_from_obj(_require(raw, "object_a", f"{where}.spec"), f"{where}.spec.object_a"),
                _target_from_obj(_require(raw, "object_b", f"{where}.spec"), f"{where}.spec.object_b"),
            )
        gt = PromptGroundTruth(
            prompt_id=prompt_id,
            object_a=str(_require(obj, "object_a", where)),
            object_b=str(_require(obj, "object_b", where)),
            relation=str(_require(obj, "relation", where)),
            spec=spec,
        )
        gt.validate()
        gts[prompt_id] = gt
    return gts


def save_detections(path: str | Path, records: list[DetectionRecord]) -> None:
    lines = []
    for rec in records:
        lines.append(
            json.dumps(
                {
                    "prompt_id": rec.prompt_id,
                    "sample_index": rec.sample_index,
                    "detections": [
                        {"label": d.label, "score": d.score, "bbox": list(d.bbox_px)}
                        for d in rec.detections
                    ],
                },
                sort_keys=False,
            )
        )
    try:
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc

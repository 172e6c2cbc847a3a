"""Loading and joining COCO caption and LVIS instance annotation files.

Both files follow the standard public JSON schemas.  The loader builds an
in-memory index keyed by image id, dropping images that lack captions or
instances (with counts), crowd/ignore instances, and RLE-encoded masks (the
sketch pipeline consumes polygon rings only).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from sketchpipe.errors import SketchPipeError


class SchemaError(SketchPipeError):
    """An annotation file is missing a required field (the JSON path is named)."""

    code = "SchemaError"


class IdCollision(SketchPipeError):
    """Two entries claim the same id."""

    code = "IdCollision"


@dataclass(frozen=True)
class ImageInfo:
    id: int
    file_name: str
    width: int
    height: int


@dataclass(frozen=True)
class CaptionAnn:
    id: int
    image_id: int
    caption: str


@dataclass(frozen=True)
class InstanceAnn:
    id: int
    image_id: int
    category_id: int
    segmentation: tuple[tuple[float, ...], ...]  # flat x,y rings
    bbox: tuple[float, float, float, float]  # x, y, w, h
    area: float


@dataclass
class LoadReport:
    images_total: int = 0
    images_dropped_no_caption: int = 0
    images_dropped_no_instances: int = 0
    instances_dropped_crowd: int = 0
    instances_dropped_rle: int = 0
    kept: int = 0


@dataclass
class AnnotationSource:
    images: dict[int, ImageInfo]
    captions_by_image: dict[int, list[CaptionAnn]]
    instances_by_image: dict[int, list[InstanceAnn]]
    categories: dict[int, str]
    report: LoadReport = field(default_factory=LoadReport)


def _read_json(path: str | Path) -> dict:
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise SchemaError(f"cannot read {p}: {exc}") from exc
    except ValueError as exc:
        raise SchemaError(f"{p} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError(f"{p}: top level must be a JSON object")
    return obj


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaError(f"missing required field {path}.{key}")
    return obj[key]


def _load_images(doc: dict, src: str) -> dict[int, ImageInfo]:
    images: dict[int, ImageInfo] = {}
    for i, entry in enumerate(_require(doc, "images", src)):
        path = f"{src}.images[{i}]"
        info = ImageInfo(
            id=int(_require(entry, "id", path)),
            file_name=str(_require(entry, "file_name", path)),
            width=int(_require(entry, "width", path)),
            height=int(_require(entry, "height", path)),
        )
        if info.id in images:
            raise IdCollision(f"duplicate image id {info.id} at {path}")
        images[info.id] = info
    return images


def load_annotations(coco_captions_path: str | Path, lvis_path: str | Path) -> AnnotationSource:
    """Join caption and instance files into one index keyed by image id."""
    cap_doc = _read_json(coco_captions_path)
    lvis_doc = _read_json(lvis_path)

    images = _load_images(cap_doc, "captions")
    lvis_images = _load_images(lvis_doc, "lvis")
    for iid, info in lvis_images.items():
        if iid not in images:
            images[iid] = info

    categories: dict[int, str] = {}
    for i, entry in enumerate(_require(lvis_doc, "categories", "lvis")):
        path = f"lvis.categories[{i}]"
        cid = int(_require(entry, "id", path))
        name = str(_require(entry, "name", path))
        if cid in categories:
            raise IdCollision(f"duplicate category id {cid} at {path}")
        categories[cid] = name

    captions_by_image: dict[int, list[CaptionAnn]] = {}
    for i, entry in enumerate(_require(cap_doc, "annotations", "captions")):
        path = f"captions.annotations[{i}]"
        ann = CaptionAnn(
            id=int(_require(entry, "id", path)),
            image_id=int(_require(entry, "image_id", path)),
            caption=str(_require(entry, "caption", path)),
        )
        if ann.image_id not in images:
            raise SchemaError(
                f"caption annotation {ann.id} references unknown image_id {ann.image_id}"
            )
        captions_by_image.setdefault(ann.image_id, []).append(ann)

    report = LoadReport(images_total=len(images))
    instances_by_image: dict[int, list[InstanceAnn]] = {}
    for i, entry in enumerate(_require(lvis_doc, "annotations", "lvis")):
        path = f"lvis.annotations[{i}]"
        aid = int(_require(entry, "id", path))
        iid = int(_require(entry, "image_id", path))
        if iid not in images:
            raise SchemaError(f"instance annotation {aid} references unknown image_id {iid}")
        if int(entry.get("iscrowd", 0)):
            report.instances_dropped_crowd += 1
            continue
        seg = _require(entry, "segmentation", path)
        if not isinstance(seg, list) or (seg and not isinstance(seg[0], list)):
            # RLE-encoded masks carry no polygon rings.
            report.instances_dropped_rle += 1
            continue
        cid = int(_require(entry, "category_id", path))
        if cid not in categories:
            raise SchemaError(f"instance annotation {aid} references unknown category_id {cid}")
        bbox_raw = _require(entry, "bbox", path)
        if not isinstance(bbox_raw, list) or len(bbox_raw) != 4:
            raise SchemaError(f"{path}.bbox must be [x, y, w, h]")
        bbox = tuple(float(v) for v in bbox_raw)
        area = float(entry.get("area", bbox[2] * bbox[3]))
        ann = InstanceAnn(
            id=aid,
            image_id=iid,
            category_id=cid,
            segmentation=tuple(tuple(float(v) for v in ring) for ring in seg),
            bbox=bbox,
            area=area,
        )
        instances_by_image.setdefault(iid, []).append(ann)

    kept_images: dict[int, ImageInfo] = {}
    for iid in images:
        has_caption = bool(captions_by_image.get(iid))
        has_instances = bool(instances_by_image.get(iid))
        if not has_caption:
            report.images_dropped_no_caption += 1
        elif not has_instances:
            report.images_dropped_no_instances += 1
        else:
            kept_images[iid] = images[iid]
    report.kept = len(kept_images)

    return AnnotationSource(
        images=kept_images,
        captions_by_image={
            iid: sorted(captions_by_image[iid], key=lambda a: a.id) for iid in kept_images
        },
        instances_by_image={
            iid: sorted(instances_by_image[iid], key=lambda a: a.id) for iid in kept_images
        },
        categories=categories,
        report=report,
    )

"""Triplet construction: one sketch + manifest row per (image, caption).

The manifest is JSONL with a fixed key order, rows sorted by image id, and
deterministic float formatting, so reruns produce byte-identical output at any
parallelism level.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from sketchpipe.dataset.annotations import AnnotationSource, InstanceAnn
from sketchpipe.errors import SketchPipeError
from sketchpipe.grounding import MAX_GROUNDINGS, GroundingEntry, GroundingSet
from sketchpipe.raster.render import render_polygons
from sketchpipe.tikz.ast import Point

log = logging.getLogger(__name__)

MANIFEST_KEYS = ("image_id", "file_name", "caption", "sketch_path", "src_size", "groundings")

SKETCH_SIZE = 512
CM_PER_PX = 0.01  # inverse of the 100 px/cm rasterization scale


class RenderError(SketchPipeError):
    """Sketch rendering failed for one image (the build skips it)."""

    code = "RenderError"


@dataclass(frozen=True)
class TripletRecord:
    image_id: int
    file_name: str
    caption: str
    sketch_path: str
    src_size: tuple[int, int]
    groundings: GroundingSet

    def to_obj(self) -> dict:
        return {
            "image_id": self.image_id,
            "file_name": self.file_name,
            "caption": self.caption,
            "sketch_path": self.sketch_path,
            "src_size": list(self.src_size),
            "groundings": self.groundings.to_obj(),
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "TripletRecord":
        return cls(
            image_id=int(obj["image_id"]),
            file_name=str(obj["file_name"]),
            caption=str(obj["caption"]),
            sketch_path=str(obj["sketch_path"]),
            src_size=(int(obj["src_size"][0]), int(obj["src_size"][1])),
            groundings=GroundingSet.from_obj(obj["groundings"]),
        )


@dataclass
class BuildSummary:
    rows_written: int
    images_failed: int
    manifest_path: Path
    sketch_dir: Path


def _rings(instances: list[InstanceAnn]) -> list[list[tuple[float, float]]]:
    rings = []
    for ann in instances:
        for flat in ann.segmentation:
            rings.append([(flat[i], flat[i + 1]) for i in range(0, len(flat) - 1, 2)])
    return rings


def _grounding_entries(
    instances: list[InstanceAnn],
    categories: dict[int, str],
    src_w: int,
    src_h: int,
) -> list[GroundingEntry]:
    # Keep the largest-area instances when over the cap; annotation id breaks
    # area ties so truncation is deterministic.
    chosen = sorted(instances, key=lambda a: (-a.area, a.id))[:MAX_GROUNDINGS]
    chosen.sort(key=lambda a: a.id)
    s = SKETCH_SIZE / max(src_w, src_h)
    pad_x = (SKETCH_SIZE - src_w * s) / 2.0
    pad_y = (SKETCH_SIZE - src_h * s) / 2.0
    entries = []
    for ann in chosen:
        bx, by, bw, bh = ann.bbox
        cx = (bx + bw / 2.0) * s + pad_x
        cy = (by + bh / 2.0) * s + pad_y
        # Sloppy annotations can push a bbox past the image edge; clamp into
        # the canvas so the center bound holds.
        cx = min(max(cx, 0.0), SKETCH_SIZE)
        cy = min(max(cy, 0.0), SKETCH_SIZE)
        entries.append(
            GroundingEntry(
                name=categories[ann.category_id],
                center=Point(round(cx * CM_PER_PX, 6), round(cy * CM_PER_PX, 6)),
                size=(round(bw * s * CM_PER_PX, 6), round(bh * s * CM_PER_PX, 6)),
            )
        )
    return entries


def build_triplets(
    src: AnnotationSource,
    out_dir: str | Path,
    limit: int | None = None,
    all_captions: bool = False,
    outline: bool = False,
    jobs: int = 1,
) -> BuildSummary:
    """Render sketches and write ``manifest.jsonl`` + ``sketches/*.pgm``.

    One row per image by default (the caption with the smallest annotation
    id); ``all_captions`` emits a row per caption sharing the sketch.  Failed
    images are logged and skipped; the build continues.
    """
    out = Path(out_dir)
    sketch_dir = out / "sketches"
    sketch_dir.mkdir(parents=True, exist_ok=True)

    image_ids = sorted(src.images)
    if limit is not None:
        image_ids = image_ids[:limit]

    def work(iid: int) -> tuple[list[TripletRecord], bytes] | None:
        info = src.images[iid]
        instances = src.instances_by_image[iid]
        try:
            bitmap = render_polygons(
                _rings(instances),
                (info.width, info.height),
                dst=SKETCH_SIZE,
                outline=outline,
                provenance=f"image:{iid}",
            )
        except SketchPipeError as exc:
            raise RenderError(f"image {iid}: {exc.message}") from exc
        entries = _grounding_entries(instances, src.categories, info.width, info.height)
        groundings = GroundingSet(entries=entries, source="dataset")
        groundings.validate()
        sketch_name = f"sketches/{iid:012d}.pgm"
        captions = src.captions_by_image[iid] if all_captions else src.captions_by_image[iid][:1]
        records = [
            TripletRecord(
                image_id=iid,
                file_name=info.file_name,
                caption=cap.caption,
                sketch_path=sketch_name,
                src_size=(info.width, info.height),
                groundings=groundings,
            )
            for cap in captions
        ]
        return records, bitmap.to_pgm()

    results: dict[int, tuple[list[TripletRecord], bytes]] = {}

    def run_one(iid: int) -> None:
        try:
            results[iid] = work(iid)
        except RenderError as exc:
            log.warning("skipping %s", exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(run_one, image_ids))
    else:
        for iid in image_ids:
            run_one(iid)
    failed = len(image_ids) - len(results)

    manifest_path = out / "manifest.jsonl"
    rows = 0
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        for iid in image_ids:  # sorted: deterministic reduce regardless of jobs
            if iid not in results:
                continue
            records, pgm = results[iid]
            (out / records[0].sketch_path).write_bytes(pgm)
            for rec in records:
                fh.write(json.dumps(rec.to_obj(), ensure_ascii=False) + "\n")
                rows += 1
    return BuildSummary(
        rows_written=rows, images_failed=failed, manifest_path=manifest_path, sketch_dir=sketch_dir
    )


def read_manifest(path: str | Path) -> list[TripletRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TripletRecord.from_obj(json.loads(line)))
    return records

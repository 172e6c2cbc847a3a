"""Shared fixtures: the checked-in sketch corpus and a generated COCO/LVIS
sample slice (50 keepable images plus known-droppable edge cases)."""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

CATEGORY_NAMES = [
    "zebra", "person", "bus", "giraffe", "apple", "dog",
    "cat", "tv", "surfboard", "boat", "truck", "carrot",
]

SIZES = [(640, 480), (480, 640), (512, 512), (600, 400), (333, 500)]

ZEBRA_IMAGE_ID = 1001
BIG_IMAGE_ID = 1050  # 45 instances, exercises the 30-grounding cap
NO_CAPTION_IMAGE_ID = 1951
NO_INSTANCE_IMAGE_ID = 1952


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return DATA_DIR / "tikz"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return DATA_DIR / "fixtures"


@pytest.fixture(scope="session")
def corpus_sources(corpus_dir) -> dict[str, str]:
    return {p.stem: p.read_text(encoding="utf-8") for p in sorted(corpus_dir.glob("*.tikz"))}


def _polygon(rng: random.Random, width: int, height: int) -> list[float]:
    """A star-shaped (hence simple) polygon as a flat x,y ring."""
    margin = 20
    cx = rng.uniform(margin, width - margin)
    cy = rng.uniform(margin, height - margin)
    n = rng.randint(3, 7)
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    flat = []
    for a in angles:
        r = rng.uniform(8, min(60, cx, cy, width - cx, height - cy))
        flat.extend([round(cx + r * math.cos(a), 2), round(cy + r * math.sin(a), 2)])
    return flat


def _bbox_of(rings: list[list[float]]) -> list[float]:
    xs = [v for ring in rings for v in ring[0::2]]
    ys = [v for ring in rings for v in ring[1::2]]
    return [round(min(xs), 2), round(min(ys), 2), round(max(xs) - min(xs), 2), round(max(ys) - min(ys), 2)]


def write_sample_annotations(out_dir: Path, seed: int = 20240817) -> tuple[Path, Path]:
    """Generate paired caption/instance files: 50 kept images, one image with
    neither captions nor kept instances on each side, one crowd and one RLE
    instance, and one image carrying 45 instances."""
    rng = random.Random(seed)
    images = []
    captions = []
    instances = []
    cap_id = 9000
    ann_id = 5000

    def add_image(iid: int):
        w, h = SIZES[iid % len(SIZES)]
        images.append({"id": iid, "file_name": f"{iid:012d}.jpg", "width": w, "height": h})
        return w, h

    def add_caption(iid: int, text: str):
        nonlocal cap_id
        captions.append({"id": cap_id, "image_id": iid, "caption": text})
        cap_id += 1

    def add_instance(iid: int, w: int, h: int, category_id: int, rings: int = 1, **extra):
        nonlocal ann_id
        seg = [_polygon(rng, w, h) for _ in range(rings)]
        entry = {
            "id": ann_id,
            "image_id": iid,
            "category_id": category_id,
            "segmentation": seg,
            "bbox": _bbox_of(seg),
        }
        entry.update(extra)
        instances.append(entry)
        ann_id += 1

    # the zebra pair with a fixed caption
    w, h = add_image(ZEBRA_IMAGE_ID)
    add_caption(ZEBRA_IMAGE_ID, "Two zebras seem to be embracing in the wild")
    add_caption(ZEBRA_IMAGE_ID, "A pair of zebras standing close together")
    add_instance(ZEBRA_IMAGE_ID, w, h, 1)
    add_instance(ZEBRA_IMAGE_ID, w, h, 1)

    for iid in range(1002, 1050):
        w, h = add_image(iid)
        add_caption(iid, f"scene number {iid} with assorted objects")
        if rng.random() < 0.3:
            add_caption(iid, f"another view of scene {iid}")
        for _ in range(rng.randint(1, 6)):
            cat = rng.randint(1, len(CATEGORY_NAMES))
            add_instance(iid, w, h, cat, rings=2 if rng.random() < 0.2 else 1)

    w, h = add_image(BIG_IMAGE_ID)
    add_caption(BIG_IMAGE_ID, "a very crowded scene")
    for _ in range(45):
        add_instance(BIG_IMAGE_ID, w, h, rng.randint(1, len(CATEGORY_NAMES)))

    # droppable: instances but no caption
    w, h = add_image(NO_CAPTION_IMAGE_ID)
    add_instance(NO_CAPTION_IMAGE_ID, w, h, 2)
    # droppable: caption, but its only instances are crowd and RLE
    w, h = add_image(NO_INSTANCE_IMAGE_ID)
    add_caption(NO_INSTANCE_IMAGE_ID, "nothing usable in here")
    add_instance(NO_INSTANCE_IMAGE_ID, w, h, 3, iscrowd=1)
    instances.append(
        {
            "id": ann_id,
            "image_id": NO_INSTANCE_IMAGE_ID,
            "category_id": 3,
            "segmentation": {"counts": "abc0", "size": [h, w]},
            "bbox": [1, 1, 10, 10],
        }
    )

    captions_path = out_dir / "captions.json"
    lvis_path = out_dir / "instances.json"
    captions_path.write_text(json.dumps({"images": images, "annotations": captions}))
    lvis_path.write_text(
        json.dumps(
            {
                "images": images,
                "annotations": instances,
                "categories": [
                    {"id": i + 1, "name": name} for i, name in enumerate(CATEGORY_NAMES)
                ],
            }
        )
    )
    return captions_path, lvis_path


@pytest.fixture(scope="session")
def sample_annotation_files(tmp_path_factory) -> tuple[Path, Path]:
    out = tmp_path_factory.mktemp("annotations")
    return write_sample_annotations(out)

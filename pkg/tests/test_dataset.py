import filecmp
import json

import pytest

from sketchpipe.dataset.annotations import IdCollision, SchemaError, load_annotations
from sketchpipe.dataset.builder import build_triplets, read_manifest
from sketchpipe.raster.bitmap import SketchBitmap

from conftest import BIG_IMAGE_ID, NO_CAPTION_IMAGE_ID, NO_INSTANCE_IMAGE_ID, ZEBRA_IMAGE_ID


@pytest.fixture(scope="module")
def source(sample_annotation_files):
    captions, instances = sample_annotation_files
    return load_annotations(captions, instances)


def test_load_report_counts(source):
    r = source.report
    assert r.images_total == 52
    assert r.kept == 50
    assert r.images_dropped_no_caption == 1
    assert r.images_dropped_no_instances == 1
    assert r.instances_dropped_crowd == 1
    assert r.instances_dropped_rle == 1


def test_kept_index_contents(source):
    assert ZEBRA_IMAGE_ID in source.images
    assert BIG_IMAGE_ID in source.images
    assert NO_CAPTION_IMAGE_ID not in source.images
    assert NO_INSTANCE_IMAGE_ID not in source.images
    zebra = source.instances_by_image[ZEBRA_IMAGE_ID]
    assert len(zebra) == 2
    assert all(source.categories[a.category_id] == "zebra" for a in zebra)
    assert source.captions_by_image[ZEBRA_IMAGE_ID][0].caption == (
        "Two zebras seem to be embracing in the wild"
    )
    assert len(source.instances_by_image[BIG_IMAGE_ID]) == 45


def test_schema_errors(tmp_path):
    cap = tmp_path / "c.json"
    ins = tmp_path / "i.json"
    ins.write_text(json.dumps({"images": [], "annotations": [], "categories": []}))

    cap.write_text("[]")
    with pytest.raises(SchemaError, match="top level"):
        load_annotations(cap, ins)

    cap.write_text(json.dumps({"annotations": []}))
    with pytest.raises(SchemaError, match="captions.images"):
        load_annotations(cap, ins)

    cap.write_text(
        json.dumps(
            {
                "images": [{"id": 1, "file_name": "a.jpg", "width": 10, "height": 10}],
                "annotations": [{"id": 5, "image_id": 99, "caption": "ghost"}],
            }
        )
    )
    with pytest.raises(SchemaError, match="unknown image_id 99"):
        load_annotations(cap, ins)

    with pytest.raises(SchemaError, match="cannot read"):
        load_annotations(tmp_path / "missing.json", ins)


def test_duplicate_ids_collide(tmp_path):
    img = {"id": 1, "file_name": "a.jpg", "width": 10, "height": 10}
    cap = tmp_path / "c.json"
    ins = tmp_path / "i.json"
    cap.write_text(json.dumps({"images": [img, img], "annotations": []}))
    ins.write_text(json.dumps({"images": [], "annotations": [], "categories": []}))
    with pytest.raises(IdCollision, match="duplicate image id 1"):
        load_annotations(cap, ins)

    cap.write_text(json.dumps({"images": [img], "annotations": []}))
    ins.write_text(
        json.dumps(
            {
                "images": [],
                "annotations": [],
                "categories": [{"id": 7, "name": "cat"}, {"id": 7, "name": "dog"}],
            }
        )
    )
    with pytest.raises(IdCollision, match="duplicate category id 7"):
        load_annotations(cap, ins)


def test_unknown_category_rejected(tmp_path):
    cap = tmp_path / "c.json"
    ins = tmp_path / "i.json"
    img = {"id": 1, "file_name": "a.jpg", "width": 100, "height": 100}
    cap.write_text(json.dumps({"images": [img], "annotations": []}))
    ins.write_text(
        json.dumps(
            {
                "images": [img],
                "annotations": [
                    {
                        "id": 2,
                        "image_id": 1,
                        "category_id": 42,
                        "segmentation": [[0, 0, 10, 0, 10, 10]],
                        "bbox": [0, 0, 10, 10],
                    }
                ],
                "categories": [{"id": 1, "name": "cat"}],
            }
        )
    )
    with pytest.raises(SchemaError, match="unknown category_id 42"):
        load_annotations(cap, ins)


# -- triplet building ----------------------------------------------------


@pytest.fixture(scope="module")
def built(source, tmp_path_factory):
    out = tmp_path_factory.mktemp("build")
    summary = build_triplets(source, out)
    return out, summary


def test_build_summary(built):
    out, summary = built
    assert summary.rows_written == 50
    assert summary.images_failed == 0
    assert summary.manifest_path == out / "manifest.jsonl"


def test_manifest_rows(built):
    out, _ = built
    records = read_manifest(out / "manifest.jsonl")
    assert [r.image_id for r in records] == sorted(r.image_id for r in records)
    assert records[0].image_id == ZEBRA_IMAGE_ID
    assert records[0].caption == "Two zebras seem to be embracing in the wild"
    for rec in records:
        assert rec.groundings.source == "dataset"
        assert 1 <= len(rec.groundings.entries) <= 30
        for e in rec.groundings.entries:
            assert 0.0 <= e.center.x <= 5.12 and 0.0 <= e.center.y <= 5.12
            assert e.size is not None and e.size[0] > 0 and e.size[1] > 0


def test_manifest_key_order_is_fixed(built):
    out, _ = built
    first = (out / "manifest.jsonl").read_text().splitlines()[0]
    assert list(json.loads(first)) == [
        "image_id", "file_name", "caption", "sketch_path", "src_size", "groundings",
    ]


def test_sketches_resolve_and_render(built):
    out, _ = built
    for rec in read_manifest(out / "manifest.jsonl"):
        path = out / rec.sketch_path
        assert path.is_file()
        bmp = SketchBitmap.load_pgm(path)
        assert bmp.pixels.shape == (512, 512)
        assert bmp.ink_area > 0


def test_grounding_cap_keeps_largest(source, built):
    out, _ = built
    rec = next(r for r in read_manifest(out / "manifest.jsonl") if r.image_id == BIG_IMAGE_ID)
    assert len(rec.groundings.entries) == 30
    areas = sorted((a.area for a in source.instances_by_image[BIG_IMAGE_ID]), reverse=True)
    cutoff = areas[29]
    # every kept entry covers at least as much source area as the cutoff
    kept_areas = sorted(
        (e.size[0] * e.size[1] for e in rec.groundings.entries), reverse=True
    )
    src_w, src_h = rec.src_size
    s = 512 / max(src_w, src_h) * 0.01
    assert min(kept_areas) >= cutoff * s * s * 0.99  # bbox area scales by s^2


def test_build_is_deterministic_and_jobs_invariant(source, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    build_triplets(source, a, jobs=1)
    build_triplets(source, b, jobs=4)
    assert (a / "manifest.jsonl").read_bytes() == (b / "manifest.jsonl").read_bytes()
    match, mismatch, errors = filecmp.cmpfiles(
        a / "sketches",
        b / "sketches",
        common=[p.name for p in (a / "sketches").iterdir()],
        shallow=False,
    )
    assert not mismatch and not errors
    assert len(match) == 50


def test_all_captions_mode(source, sample_annotation_files, tmp_path):
    captions_path, _ = sample_annotation_files
    summary = build_triplets(source, tmp_path / "all", all_captions=True)
    doc = json.loads(captions_path.read_text())
    kept_ids = set(source.images)
    expected = sum(1 for ann in doc["annotations"] if ann["image_id"] in kept_ids)
    assert summary.rows_written == expected > 50
    records = read_manifest(tmp_path / "all" / "manifest.jsonl")
    zebra_rows = [r for r in records if r.image_id == ZEBRA_IMAGE_ID]
    assert len(zebra_rows) == 2
    assert zebra_rows[0].sketch_path == zebra_rows[1].sketch_path


def test_limit(source, tmp_path):
    summary = build_triplets(source, tmp_path / "lim", limit=5)
    assert summary.rows_written == 5
    records = read_manifest(summary.manifest_path)
    assert [r.image_id for r in records] == sorted(source.images)[:5]


def test_outline_mode_renders_less_ink(source, tmp_path):
    build_triplets(source, tmp_path / "fill", limit=1)
    build_triplets(source, tmp_path / "line", limit=1, outline=True)
    name = f"sketches/{ZEBRA_IMAGE_ID:012d}.pgm"
    filled = SketchBitmap.load_pgm(tmp_path / "fill" / name)
    outlined = SketchBitmap.load_pgm(tmp_path / "line" / name)
    assert 0 < outlined.ink_area != filled.ink_area


def test_triplet_record_round_trip(built):
    out, _ = built
    for rec in read_manifest(out / "manifest.jsonl")[:3]:
        assert rec.from_obj(rec.to_obj()) == rec

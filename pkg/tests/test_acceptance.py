"""Whole-package acceptance gates.

Ten numbered checks, each printing one ``ACCEPTANCE <n> PASS`` (or ``FAIL``)
line; run with ``pytest tests/test_acceptance.py -v -s`` to see the verdicts
inline.  Timed gates use wall-clock budgets generous enough for CI boxes.
"""

from __future__ import annotations

import contextlib
import json
import random
import socket
import time
from fractions import Fraction

import numpy as np
import pytest

from sketchpipe.client import ServiceClient
from sketchpipe.control.branch import (
    BranchConfig,
    ToyControlBranch,
    ZeroConv,
    combine_with_backbone,
    stub_backbone,
)
from sketchpipe.control.fourier import FourierConfig, fourier_embed
from sketchpipe.control.fusion import FusionParams
from sketchpipe.control.gradcheck import ProjectionLayer, grad_check
from sketchpipe.dataset.annotations import load_annotations as load_annotation_source
from sketchpipe.dataset.builder import build_triplets, read_manifest
from sketchpipe.gateway.prompts import ObjectSpec, PromptSpec, build_prompt
from sketchpipe.gateway.runner import run_query, tally
from sketchpipe.gateway.transport import FixtureTransport, prompt_key
from sketchpipe.grounding import MAX_GROUNDINGS
from sketchpipe.metrics.position_size import DEFAULT_EPS_FRAC, position_size, score_object
from sketchpipe.metrics.records import Detection, DetectionRecord, ObjectTarget, PromptGroundTruth
from sketchpipe.metrics.visor import relation_holds, visor
from sketchpipe.raster.render import rasterize
from sketchpipe.service.app import create_app
from sketchpipe.tikz.parser import parse
from sketchpipe.tikz.printer import pretty_print

BBOX = "\\path[use as bounding box] (0,0) rectangle (5.12,5.12);"


@contextlib.contextmanager
def gate(n: int, label: str):
    """Print a single verdict line per acceptance gate."""
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {n} FAIL  {label}")
        raise
    print(f"\nACCEPTANCE {n} PASS  {label}")


def snippet(body: str) -> str:
    return f"\\begin{{tikzpicture}}\n{BBOX}\n{body}\n\\end{{tikzpicture}}\n"


def test_acceptance_01_corpus_round_trip(corpus_sources):
    with gate(1, "sample corpus parses, rasterizes at 512x512, and round-trips"):
        start = time.perf_counter()
        assert len(corpus_sources) == 3
        for _, source in sorted(corpus_sources.items()):
            program = parse(source)
            assert program.warnings == []
            bitmap = rasterize(program)
            assert (bitmap.width, bitmap.height) == (512, 512)
            assert parse(pretty_print(program)) == program
        assert time.perf_counter() - start < 1.0


def test_acceptance_02_rasterizer_analytics():
    with gate(2, "exact rectangle area, disk area within 2%, y-flip on 100 programs"):
        start = time.perf_counter()

        rect = rasterize(parse(snippet("\\fill[red] (1,0.5) rectangle (1.1,1.5);")))
        assert rect.ink_area == 1000  # 10 columns x 100 rows at 100 px/cm

        disk = rasterize(parse(snippet("\\fill[red] (1.5,2.5) circle (0.5);")))
        assert disk.ink_area == pytest.approx(np.pi * 2500, rel=0.02)

        rng = random.Random(20250825)
        for _ in range(100):
            x = rng.uniform(0.6, 4.5)
            r = rng.uniform(0.1, 0.45)
            y_lo = rng.uniform(0.6, 2.2)
            y_hi = y_lo + rng.uniform(0.7, 2.3)
            rows = []
            for y in (y_lo, y_hi):
                bmp = rasterize(parse(snippet(f"\\fill[red] ({x:.3f},{y:.3f}) circle ({r:.3f});")))
                rows.append(np.nonzero(bmp.pixels)[0].mean())
            assert rows[1] < rows[0]  # larger drawing y lands on a smaller image row

        assert time.perf_counter() - start < 5.0


def test_acceptance_03_zero_init_identity():
    with gate(3, "residuals are exactly zero at init; stub backbone unchanged bit-for-bit"):
        rng = np.random.default_rng(20250825)
        for seed in range(20):
            branch = ToyControlBranch(BranchConfig(seed=seed))
            sketch = (rng.random((512, 512)) < 0.1).astype(np.uint8)
            residuals = branch.forward(sketch)
            assert len(residuals) == 5
            for res in residuals:
                assert np.all(res == 0.0)
            backbone = stub_backbone(branch, seed=seed)
            combined = combine_with_backbone(backbone, residuals)
            for before, after in zip(backbone, combined):
                assert before.tobytes() == after.tobytes()


def test_acceptance_04_gradient_checks():
    with gate(4, "analytic gradients match central differences to 1e-4"):
        rng = np.random.default_rng(7)

        conv = ZeroConv(6)
        conv.weight[:] = rng.standard_normal(conv.weight.shape)
        conv.bias[:] = rng.standard_normal(conv.bias.shape)
        x = rng.standard_normal((5, 4, 6))
        assert grad_check(conv, x, step=1e-4, samples=12, seed=1) < 1e-4

        proj = ProjectionLayer(FusionParams.seeded(3).projection)
        assert grad_check(proj, rng.standard_normal(784), step=1e-4, samples=12, seed=2) < 1e-4


def test_acceptance_05_fourier_embedding():
    with gate(5, "16-dim Fourier features, exact anchors, grid injectivity at 0.01 cm"):
        cfg = FourierConfig()
        assert cfg.dim == 16

        origin = fourier_embed((0.0, 0.0), cfg)
        np.testing.assert_allclose(origin, np.array([0.0, 1.0, 0.0, 1.0] * 4), rtol=0, atol=1e-12)

        corner = fourier_embed((5.12, 0.0), cfg)
        expected = np.array([0.0, -1.0, 0.0, 1.0] + [0.0, 1.0, 0.0, 1.0] * 3)
        np.testing.assert_allclose(corner, expected, rtol=0, atol=1e-12)

        # The features are separable: half the vector depends only on x, half
        # only on y.  Injectivity on each axis grid therefore gives injectivity
        # on the full 513x513 grid.
        grid = [round(i * 0.01, 2) for i in range(513)]
        x_feats = {fourier_embed((u, 0.0), cfg).tobytes() for u in grid}
        y_feats = {fourier_embed((0.0, v), cfg).tobytes() for v in grid}
        assert len(x_feats) == len(grid)
        assert len(y_feats) == len(grid)


def _random_population(rng: random.Random):
    gts: dict[str, PromptGroundTruth] = {}
    records: list[DetectionRecord] = []
    for p in range(rng.randint(1, 5)):
        pid = f"p{p}"
        gts[pid] = PromptGroundTruth(pid, "dog", "cat", rng.choice(("left", "right", "above", "below")))
        for s in range(4):
            dets = []
            for label in ("dog", "cat"):
                if rng.random() < 0.8:
                    x, y = rng.uniform(0, 462), rng.uniform(0, 462)
                    dets.append(Detection(label, rng.uniform(0.2, 1.0), (x, y, 50.0, 50.0)))
            records.append(DetectionRecord(pid, s, tuple(dets)))
    return records, gts


def test_acceptance_06_metric_identities():
    with gate(6, "count identities on 1000 random populations, plus rounded-rate cross-check"):
        start = time.perf_counter()
        rng = random.Random(20250825)

        for _ in range(1000):
            records, gts = _random_population(rng)
            counts = visor(records, gts)
            oa = Fraction(counts.both_present, counts.images)
            uncond = Fraction(counts.fully_correct, counts.images)
            if counts.both_present:
                cond = Fraction(counts.fully_correct, counts.both_present)
                assert uncond == oa * cond
            at_least = counts.prompts_at_least
            assert at_least[0] >= at_least[1] >= at_least[2] >= at_least[3]
            assert sum(at_least) == counts.fully_correct
            # mean of the four group rates equals the unconditional rate
            assert Fraction(sum(at_least), 4 * counts.prompts) == uncond

        # growing the tolerance can only turn failures into passes
        ladder = (0.0, 5.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0)
        for _ in range(300):
            target = ObjectTarget(
                (rng.uniform(0.5, 4.6), rng.uniform(0.5, 4.6)),
                (rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0)),
            )
            det = Detection(
                "dog",
                0.9,
                (rng.uniform(0, 400), rng.uniform(0, 400), rng.uniform(5, 112), rng.uniform(5, 112)),
            )
            rec = DetectionRecord("q", 0, (det,))
            scores = [score_object(rec, "dog", target, tol) for tol in ladder]
            for tight, loose in zip(scores, scores[1:]):
                assert loose.pos_ok >= tight.pos_ok
                assert loose.size_ok >= tight.size_ok

        # left/right and above/below mirror each other exactly
        for _ in range(200):
            a = (rng.uniform(0, 512), rng.uniform(0, 512))
            b = (rng.uniform(0, 512), rng.uniform(0, 512))
            assert relation_holds(a, b, "left") == relation_holds(b, a, "right")
            assert relation_holds(a, b, "above") == relation_holds(b, a, "below")
            assert not (relation_holds(a, b, "left") and relation_holds(a, b, "right"))
            assert not (relation_holds(a, b, "above") and relation_holds(a, b, "below"))

        # two rounded percentage triples that must satisfy uncond = oa x cond
        # to within half a rounding step of the published-precision format
        for oa_pct, cond_pct, uncond_pct in ((29.86, 62.98, 18.81), (63.93, 59.27, 37.89)):
            assert abs(oa_pct / 100 * cond_pct / 100 - uncond_pct / 100) < 0.0005

        assert time.perf_counter() - start < 10.0


def test_acceptance_07_position_size_thresholds():
    with gate(7, "19.968 px tolerance: exact spec passes, 25 px offset fails position"):
        assert DEFAULT_EPS_FRAC * 512 == pytest.approx(19.968, abs=1e-9)

        gts = {
            "p0": PromptGroundTruth(
                "p0",
                "giraffe",
                "apple",
                "left",
                spec=(
                    ObjectTarget((1.5, 2.5), (1.0, 1.0)),
                    ObjectTarget((4.0, 2.5), (1.0, 1.0)),
                ),
            )
        }

        def record(giraffe_x: float, extra_first: bool = False) -> DetectionRecord:
            dets = [
                Detection("giraffe", 0.9, (giraffe_x, 212.0, 100.0, 100.0)),
                Detection("apple", 0.9, (350.0, 212.0, 100.0, 100.0)),
            ]
            if extra_first:
                dets = [Detection("giraffe", 0.3, (10.0, 10.0, 20.0, 20.0))] + dets[::-1]
            return DetectionRecord("p0", 0, tuple(dets))

        exact = position_size([record(100.0)], gts)
        assert all(rate == 1.0 for rate in exact.rates.values())
        assert len(exact.rates) == 7

        shifted = position_size([record(125.0)], gts)  # center off by 25 px
        rates = shifted.rates
        assert rates["Obj1 Pos"] == rates["All Pos"] == rates["Pos & Size"] == 0.0
        assert rates["Obj1 Size"] == rates["Obj2 Pos"] == rates["Obj2 Size"] == rates["All Size"] == 1.0

        # reordering detections (and adding a low-score decoy) changes nothing
        assert position_size([record(100.0, extra_first=True)], gts) == exact
        assert position_size([record(125.0, extra_first=True)], gts) == shifted


def test_acceptance_08_dataset_determinism(sample_annotation_files, tmp_path):
    with gate(8, "50-image build is byte-identical across runs; rows stay in contract"):
        start = time.perf_counter()
        captions, instances = sample_annotation_files
        source = load_annotation_source(captions, instances)
        assert len(source.images) == 50

        first = build_triplets(source, tmp_path / "a")
        second = build_triplets(source, tmp_path / "b")
        assert first.rows_written == second.rows_written == 50

        manifest_a = (tmp_path / "a" / "manifest.jsonl").read_bytes()
        manifest_b = (tmp_path / "b" / "manifest.jsonl").read_bytes()
        assert manifest_a == manifest_b
        sketches = sorted(p.name for p in (tmp_path / "a" / "sketches").iterdir())
        assert sketches == sorted(p.name for p in (tmp_path / "b" / "sketches").iterdir())
        for name in sketches:
            assert (tmp_path / "a" / "sketches" / name).read_bytes() == (
                tmp_path / "b" / "sketches" / name
            ).read_bytes()

        for row in read_manifest(tmp_path / "a" / "manifest.jsonl"):
            entries = row.groundings.entries
            assert len(entries) <= MAX_GROUNDINGS
            for entry in entries:
                assert 0.0 <= entry.center.x <= 5.12
                assert 0.0 <= entry.center.y <= 5.12
            assert (tmp_path / "a" / row.sketch_path).is_file()

        assert time.perf_counter() - start < 30.0


OK_RESPONSE = """Step-by-step drawing guide:
1. Draw the {a} as a filled square in the lower left.
2. Draw the {b} as a filled square in the upper right.

\\begin{{tikzpicture}}
\\useasboundingbox (0,0) rectangle (5.12,5.12);
\\fill[red] (1.0,1.0) rectangle (2.0,2.0);
\\fill[red] (3.0,3.0) rectangle (4.0,4.0);
\\end{{tikzpicture}}

Summary of the drawing,
{{`object name': ${a}, 'position': $(1.5, 1.5)}}
{{`object name': ${b}, 'position': $(3.5, 3.5)}}
"""

BROKEN_RESPONSE = """Here is the drawing.

\\begin{tikzpicture}
\\fill[red] circle;
\\end{tikzpicture}
"""


def test_acceptance_09_hermetic_replay(tmp_path, monkeypatch):
    with gate(9, "100-fixture replay tallies 5 non-runnable with zero network I/O"):
        fixtures = tmp_path / "fixtures"
        fixtures.mkdir()
        specs = []
        for i in range(100):
            spec = PromptSpec(objects=[ObjectSpec(f"thing{i}"), ObjectSpec("box")], relation="above")
            raw = (
                BROKEN_RESPONSE
                if i < 5
                else OK_RESPONSE.format(a=f"thing{i}", b="box")
            )
            key = prompt_key(build_prompt(spec))
            (fixtures / f"{key}.json").write_text(
                json.dumps({"prompt_sha256": key, "raw_response": raw}), encoding="utf-8"
            )
            specs.append(spec)

        def deny(*args, **kwargs):
            raise AssertionError("network I/O attempted in replay mode")

        monkeypatch.setattr(socket.socket, "connect", deny)
        monkeypatch.setattr(socket, "create_connection", deny)
        monkeypatch.setattr(socket, "getaddrinfo", deny)

        transport = FixtureTransport(fixtures)
        statuses = [(f"q{i:03d}", run_query(spec, transport).status) for i, spec in enumerate(specs)]
        table = tally(statuses)
        assert table.total == 100
        assert table.non_runnable == 5
        assert table.empty == 0
        assert table.empty_or_non_runnable == 5
        assert table.ok == 95
        assert "# of empty image or non-runnable code,5" in table.to_csv()


def test_acceptance_10_pipeline_smoke(fixtures_dir, tmp_path):
    with gate(10, "replayed tv/surfboard pipeline keeps the above relation, matches < 30 px"):
        client = ServiceClient(app=create_app())
        body = client.pipeline(
            {"objects": [{"name": "tv"}, {"name": "surfboard"}], "relation": "above"},
            str(tmp_path / "run"),
            {"mode": "replay", "fixtures_dir": str(fixtures_dir)},
        )
        assert body["status"] == "ok"
        assert len(body["components"]) == 2

        matches = {m["name"]: m for m in body["matches"]}
        assert set(matches) == {"tv", "surfboard"}
        for match in matches.values():
            assert match["component_id"] is not None
            assert match["distance_px"] < 30.0

        by_id = {c["id"]: c for c in body["components"]}
        tv_row = by_id[matches["tv"]["component_id"]]["centroid_px"][1]
        surf_row = by_id[matches["surfboard"]["component_id"]]["centroid_px"][1]
        assert tv_row < surf_row  # above means a smaller image row after the y-flip

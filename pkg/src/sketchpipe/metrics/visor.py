"""Spatial-relation scoring over grouped detection records.

Definitions, per image: both objects present; fully correct = both present and
their centers satisfy the prompt's relation.  Aggregates:

* object accuracy: fraction of images with both objects present
* unconditional accuracy: fraction of images fully correct
* conditional accuracy: fully correct / both present (undefined when no image
  has both objects; reported as NaN)
* group accuracy at k (k = 1..4): fraction of prompts with at least k fully
  correct images among their samples

All aggregates are exposed as integer counts first; the rates are derived
properties, so identity checks can run on exact arithmetic.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

from sketchpipe.errors import SketchPipeError
from sketchpipe.metrics.records import (
    RELATIONS,
    Detection,
    DetectionRecord,
    PromptGroundTruth,
    RecordError,
    normalize_label,
)

DEFAULT_SAMPLES_PER_PROMPT = 4
DEFAULT_SCORE_THRESHOLD = 0.1


class IncompleteGroup(SketchPipeError):
    code = "metrics.incomplete_group"


@dataclass(frozen=True)
class CorrectnessFlags:
    has_a: bool
    has_b: bool
    relation_ok: bool

    @property
    def both(self) -> bool:
        return self.has_a and self.has_b

    @property
    def full(self) -> bool:
        return self.both and self.relation_ok


def best_detection(
    detections: tuple[Detection, ...], name: str, thresh: float = DEFAULT_SCORE_THRESHOLD
) -> Detection | None:
    """Highest-score detection whose label matches ``name``; ties broken by
    bbox so the result does not depend on input order."""
    wanted = normalize_label(name)
    candidates = [
        d for d in detections if d.score >= thresh and normalize_label(d.label) == wanted
    ]
    if not candidates:
        return None
    return max(candidates, key=lambda d: (d.score, d.bbox_px))


def relation_holds(center_a: tuple[float, float], center_b: tuple[float, float], relation: str) -> bool:
    """Pixel coordinates, y growing downward: above means a smaller row."""
    ax, ay = center_a
    bx, by = center_b
    if relation == "left":
        return ax < bx
    if relation == "right":
        return ax > bx
    if relation == "above":
        return ay < by
    if relation == "below":
        return ay > by
    raise RecordError(f"unknown relation {relation!r}")


def image_correctness(
    rec: DetectionRecord, gt: PromptGroundTruth, thresh: float = DEFAULT_SCORE_THRESHOLD
) -> CorrectnessFlags:
    det_a = best_detection(rec.detections, gt.object_a, thresh)
    det_b = best_detection(rec.detections, gt.object_b, thresh)
    if det_a is None or det_b is None:
        return CorrectnessFlags(det_a is not None, det_b is not None, False)
    return CorrectnessFlags(True, True, relation_holds(det_a.center, det_b.center, gt.relation))


@dataclass(frozen=True)
class VisorCounts:
    images: int
    both_present: int
    fully_correct: int
    prompts: int
    prompts_at_least: tuple[int, int, int, int]
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT

    @property
    def object_accuracy(self) -> float:
        return self.both_present / self.images if self.images else math.nan

    @property
    def unconditional(self) -> float:
        return self.fully_correct / self.images if self.images else math.nan

    @property
    def conditional(self) -> float:
        if self.both_present == 0:
            return math.nan
        return self.fully_correct / self.both_present

    @property
    def group_rates(self) -> tuple[float, float, float, float]:
        if not self.prompts:
            return (math.nan,) * 4
        return tuple(n / self.prompts for n in self.prompts_at_least)  # type: ignore[return-value]


def group_records(
    records: list[DetectionRecord],
    gts: dict[str, PromptGroundTruth],
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT,
) -> dict[str, list[DetectionRecord]]:
    """Bucket records by prompt and enforce the exact-group-size contract."""
    by_prompt: dict[str, list[DetectionRecord]] = defaultdict(list)
    for rec in records:
        if rec.prompt_id not in gts:
            raise RecordError(f"record references unknown prompt {rec.prompt_id!r}")
        if rec.sample_index >= samples_per_prompt:
            raise IncompleteGroup(
                f"prompt {rec.prompt_id!r}: sample_index {rec.sample_index} "
                f">= samples_per_prompt {samples_per_prompt}"
            )
        by_prompt[rec.prompt_id].append(rec)
    for pid in gts:
        got = len(by_prompt.get(pid, []))
        if got != samples_per_prompt:
            raise IncompleteGroup(
                f"prompt {pid!r} has {got} records, expected {samples_per_prompt}"
            )
    return {pid: sorted(by_prompt[pid], key=lambda r: r.sample_index) for pid in sorted(by_prompt)}


def visor(
    records: list[DetectionRecord],
    gts: dict[str, PromptGroundTruth],
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT,
    thresh: float = DEFAULT_SCORE_THRESHOLD,
) -> VisorCounts:
    grouped = group_records(records, gts, samples_per_prompt)
    images = both = full = 0
    at_least = [0, 0, 0, 0]
    for pid, group in grouped.items():
        gt = gts[pid]
        full_in_group = 0
        for rec in group:
            flags = image_correctness(rec, gt, thresh)
            images += 1
            both += flags.both
            full += flags.full
            full_in_group += flags.full
        for k in range(4):
            at_least[k] += full_in_group >= k + 1
    return VisorCounts(
        images=images,
        both_present=both,
        fully_correct=full,
        prompts=len(grouped),
        prompts_at_least=tuple(at_least),  # type: ignore[arg-type]
        samples_per_prompt=samples_per_prompt,
    )


def merge_visor(parts: list[VisorCounts]) -> VisorCounts:
    """Sum integer counts from disjoint prompt partitions; addition commutes,
    so the result is independent of partition order."""
    if not parts:
        raise ValueError("nothing to merge")
    spp = {p.samples_per_prompt for p in parts}
    if len(spp) != 1:
        raise ValueError(f"mixed samples_per_prompt in merge: {sorted(spp)}")
    return VisorCounts(
        images=sum(p.images for p in parts),
        both_present=sum(p.both_present for p in parts),
        fully_correct=sum(p.fully_correct for p in parts),
        prompts=sum(p.prompts for p in parts),
        prompts_at_least=tuple(
            sum(p.prompts_at_least[k] for p in parts) for k in range(4)
        ),  # type: ignore[arg-type]
        samples_per_prompt=spp.pop(),
    )


@dataclass(frozen=True)
class RelationBreakdown:
    relation: str
    prompts: int
    images: int
    both_present: int
    fully_correct: int

    @property
    def object_accuracy(self) -> float:
        return self.both_present / self.images if self.images else math.nan

    @property
    def visor_score(self) -> float:
        """Conditional accuracy within this relation's partition."""
        if self.both_present == 0:
            return math.nan
        return self.fully_correct / self.both_present


def per_relation(
    records: list[DetectionRecord],
    gts: dict[str, PromptGroundTruth],
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT,
    thresh: float = DEFAULT_SCORE_THRESHOLD,
) -> tuple[RelationBreakdown, ...]:
    grouped = group_records(records, gts, samples_per_prompt)
    tallies = {rel: [0, 0, 0, 0] for rel in RELATIONS}  # prompts, images, both, full
    for pid, group in grouped.items():
        gt = gts[pid]
        t = tallies[gt.relation]
        t[0] += 1
        for rec in group:
            flags = image_correctness(rec, gt, thresh)
            t[1] += 1
            t[2] += flags.both
            t[3] += flags.full
    return tuple(
        RelationBreakdown(
            relation=rel,
            prompts=tallies[rel][0],
            images=tallies[rel][1],
            both_present=tallies[rel][2],
            fully_correct=tallies[rel][3],
        )
        for rel in RELATIONS
    )


def merge_relations(
    parts: list[tuple[RelationBreakdown, ...]],
) -> tuple[RelationBreakdown, ...]:
    if not parts:
        raise ValueError("nothing to merge")
    return tuple(
        RelationBreakdown(
            relation=rel,
            prompts=sum(p[i].prompts for p in parts),
            images=sum(p[i].images for p in parts),
            both_present=sum(p[i].both_present for p in parts),
            fully_correct=sum(p[i].fully_correct for p in parts),
        )
        for i, rel in enumerate(RELATIONS)
    )

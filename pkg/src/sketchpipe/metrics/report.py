"""Report assembly and emission for the evaluation metrics.

The CSV layout is ``section,metric,value`` with rates printed as percentages
with two decimals; undefined rates (0/0 conditionals) print as ``undefined``.
The text format renders the same rows as aligned columns for terminals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from sketchpipe.errors import IoError
from sketchpipe.metrics.position_size import (
    DEFAULT_EPS_FRAC,
    PositionSizeCounts,
    merge_position_size,
    position_size,
)
from sketchpipe.metrics.records import DetectionRecord, PromptGroundTruth
from sketchpipe.metrics.visor import (
    DEFAULT_SAMPLES_PER_PROMPT,
    DEFAULT_SCORE_THRESHOLD,
    RelationBreakdown,
    VisorCounts,
    merge_relations,
    merge_visor,
    per_relation,
    visor,
)

CSV_HEADER = "section,metric,value"

SPATIAL_LABELS = (
    "Uncond (%)",
    "Cond (%)",
    "OA (%)",
    "Visor 1 (%)",
    "Visor 2 (%)",
    "Visor 3 (%)",
    "Visor 4 (%)",
)


@dataclass(frozen=True)
class MetricsReport:
    spatial: VisorCounts | None = None
    relations: tuple[RelationBreakdown, ...] = ()
    placement: PositionSizeCounts | None = None
    eps_frac: float = DEFAULT_EPS_FRAC

    def rows(self) -> list[tuple[str, str, float]]:
        out: list[tuple[str, str, float]] = []
        if self.spatial is not None:
            v = self.spatial
            values = (v.unconditional, v.conditional, v.object_accuracy, *v.group_rates)
            out.extend(("spatial", label, val) for label, val in zip(SPATIAL_LABELS, values))
        for rel in self.relations:
            out.append(("relation", f"{rel.relation} Visor Score (%)", rel.visor_score))
            out.append(("relation", f"{rel.relation} Object Acc (%)", rel.object_accuracy))
        if self.placement is not None:
            out.extend(
                ("placement", f"{name} (%)", val) for name, val in self.placement.rates.items()
            )
        return out


def _partition_prompts(
    records: list[DetectionRecord], gts: dict[str, PromptGroundTruth], jobs: int
) -> list[tuple[list[DetectionRecord], dict[str, PromptGroundTruth]]]:
    prompt_ids = sorted(gts)
    chunk_count = min(jobs, len(prompt_ids)) or 1
    chunks = [prompt_ids[i::chunk_count] for i in range(chunk_count)]
    out = []
    for ids in chunks:
        wanted = set(ids)
        out.append(
            (
                [r for r in records if r.prompt_id in wanted],
                {pid: gts[pid] for pid in ids},
            )
        )
    return out


def compute_report(
    records: list[DetectionRecord],
    gts: dict[str, PromptGroundTruth],
    eps_frac: float = DEFAULT_EPS_FRAC,
    samples_per_prompt: int = DEFAULT_SAMPLES_PER_PROMPT,
    thresh: float = DEFAULT_SCORE_THRESHOLD,
    euclidean: bool = False,
    include_placement: bool | None = None,
    jobs: int = 1,
) -> MetricsReport:
    """Run every metric family over one record set.  Placement scoring is
    included automatically when every prompt carries a spec, or forced by
    ``include_placement``.  With ``jobs`` > 1 the prompts are partitioned and
    scored in a thread pool; the integer counts merge exactly, so the result
    does not depend on the job count."""
    if include_placement is None:
        include_placement = bool(gts) and all(gt.spec is not None for gt in gts.values())

    def score(chunk_records, chunk_gts):
        spatial = visor(chunk_records, chunk_gts, samples_per_prompt, thresh)
        relations = per_relation(chunk_records, chunk_gts, samples_per_prompt, thresh)
        placement = (
            position_size(chunk_records, chunk_gts, eps_frac, euclidean=euclidean, thresh=thresh)
            if include_placement
            else None
        )
        return spatial, relations, placement

    if jobs <= 1 or len(gts) <= 1:
        spatial, relations, placement = score(records, gts)
    else:
        from concurrent.futures import ThreadPoolExecutor

        chunks = _partition_prompts(records, gts, jobs)
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: score(*c), chunks))
        spatial = merge_visor([p[0] for p in parts])
        relations = merge_relations([p[1] for p in parts])
        placement = merge_position_size([p[2] for p in parts]) if include_placement else None
    return MetricsReport(spatial=spatial, relations=relations, placement=placement, eps_frac=eps_frac)


def _format_rate(value: float) -> str:
    if math.isnan(value):
        return "undefined"
    return f"{value * 100.0:.2f}"


def emit_csv(report: MetricsReport) -> str:
    lines = [CSV_HEADER]
    for section, metric, value in report.rows():
        metric_field = f'"{metric}"' if "," in metric else metric
        lines.append(f"{section},{metric_field},{_format_rate(value)}")
    return "\n".join(lines) + "\n"


def emit_text(report: MetricsReport) -> str:
    rows = report.rows()
    if not rows:
        return "(empty report)\n"
    width = max(len(metric) for _, metric, _ in rows)
    lines = []
    current = None
    for section, metric, value in rows:
        if section != current:
            if current is not None:
                lines.append("")
            lines.append(f"[{section}]")
            current = section
        lines.append(f"  {metric.ljust(width)}  {_format_rate(value):>10}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> dict[tuple[str, str], float]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"expected header {CSV_HEADER!r}")
    out: dict[tuple[str, str], float] = {}
    for ln in lines[1:]:
        section, rest = ln.split(",", 1)
        if rest.startswith('"'):
            end = rest.index('"', 1)
            metric = rest[1:end]
            value_text = rest[end + 2 :]
        else:
            metric, value_text = rest.rsplit(",", 1)
        out[(section, metric)] = math.nan if value_text == "undefined" else float(value_text)
    return out


def emit_report(report: MetricsReport, path: str | Path, fmt: str = "csv") -> None:
    if fmt == "csv":
        payload = emit_csv(report)
    elif fmt == "text":
        payload = emit_text(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}; expected csv or text")
    try:
        Path(path).write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc

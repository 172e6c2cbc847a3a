"""Wire models for the HTTP service.

Each request/response pair mirrors one core operation; the ``from_core`` /
``to_core`` converters keep the dataclasses in the library free of any
serialization concerns.  Floats that can be NaN or infinite in core types
(undefined rates, unmatched distances) are mapped to ``null`` on the wire so
every payload stays strict JSON.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, Field, field_validator, model_validator

from sketchpipe.gateway.prompts import ObjectSpec, PromptSpec
from sketchpipe.gateway.runner import QueryResult
from sketchpipe.grounding import GroundingEntry, GroundingSet
from sketchpipe.raster.components import Component, GroundingMatch
from sketchpipe.tikz.ast import (
    CommandKind,
    ParseWarning,
    Point,
    Rect,
    SketchCommand,
    SketchProgram,
    Style,
)

XY = tuple[float, float]


class WarningModel(BaseModel):
    message: str
    line: int
    column: int

    @classmethod
    def from_core(cls, w: ParseWarning) -> "WarningModel":
        return cls(message=w.message, line=w.line, column=w.column)


class StyleModel(BaseModel):
    stroke_color: str | None = None
    fill_color: str | None = None
    line_width: float = 0.4

    @classmethod
    def from_core(cls, s: Style) -> "StyleModel":
        return cls(stroke_color=s.stroke_color, fill_color=s.fill_color, line_width=s.line_width)

    def to_core(self) -> Style:
        return Style(
            stroke_color=self.stroke_color,
            fill_color=self.fill_color,
            line_width=self.line_width,
        )


class CommandModel(BaseModel):
    kind: str
    points: list[XY]
    style: StyleModel
    radius: float | None = None

    @classmethod
    def from_core(cls, c: SketchCommand) -> "CommandModel":
        return cls(
            kind=c.kind.value,
            points=[(p.x, p.y) for p in c.points],
            style=StyleModel.from_core(c.style),
            radius=c.radius,
        )

    def to_core(self) -> SketchCommand:
        return SketchCommand(
            kind=CommandKind(self.kind),
            points=tuple(Point(x, y) for x, y in self.points),
            style=self.style.to_core(),
            radius=self.radius,
        )


class ProgramModel(BaseModel):
    bounding_box: tuple[float, float, float, float]  # x0, y0, x1, y1
    commands: list[CommandModel]
    warnings: list[WarningModel] = Field(default_factory=list)
    bounding_box_explicit: bool = False

    @classmethod
    def from_core(cls, p: SketchProgram) -> "ProgramModel":
        bb = p.bounding_box
        return cls(
            bounding_box=(bb.x0, bb.y0, bb.x1, bb.y1),
            commands=[CommandModel.from_core(c) for c in p.commands],
            warnings=[WarningModel.from_core(w) for w in p.warnings],
            bounding_box_explicit=p.bounding_box_explicit,
        )

    def to_core(self) -> SketchProgram:
        program = SketchProgram(
            bounding_box=Rect(*self.bounding_box),
            commands=tuple(c.to_core() for c in self.commands),
            bounding_box_explicit=self.bounding_box_explicit,
        )
        program.validate()
        return program


class GroundingEntryModel(BaseModel):
    name: str
    center: XY
    size: XY | None = None

    @classmethod
    def from_core(cls, e: GroundingEntry) -> "GroundingEntryModel":
        return cls(name=e.name, center=(e.center.x, e.center.y), size=e.size)

    def to_core(self) -> GroundingEntry:
        return GroundingEntry(name=self.name, center=Point(*self.center), size=self.size)


class GroundingSetModel(BaseModel):
    source: str = "manual"
    entries: list[GroundingEntryModel] = Field(default_factory=list)

    @classmethod
    def from_core(cls, g: GroundingSet) -> "GroundingSetModel":
        return cls(source=g.source, entries=[GroundingEntryModel.from_core(e) for e in g.entries])

    def to_core(self) -> GroundingSet:
        return GroundingSet(entries=[e.to_core() for e in self.entries], source=self.source)


class ComponentModel(BaseModel):
    id: int
    area_px: int
    centroid_px: XY
    bbox_px: tuple[int, int, int, int]

    @classmethod
    def from_core(cls, c: Component) -> "ComponentModel":
        return cls(id=c.id, area_px=c.area_px, centroid_px=c.centroid_px, bbox_px=c.bbox_px)


class MatchModel(BaseModel):
    name: str
    component_id: int | None
    distance_px: float | None  # null when no component was left to claim

    @classmethod
    def from_core(cls, m: GroundingMatch) -> "MatchModel":
        dist = None if math.isinf(m.distance_px) else m.distance_px
        return cls(name=m.name, component_id=m.component_id, distance_px=dist)


# -- parse / rasterize / ground -----------------------------------------


class ParseRequest(BaseModel):
    source: str


class ParseResponse(BaseModel):
    program: ProgramModel
    pretty: str
    command_count: int


class RasterizeRequest(BaseModel):
    source: str | None = None
    program: ProgramModel | None = None
    scale: float = 100.0
    provenance: str = ""

    @model_validator(mode="after")
    def _exactly_one_input(self) -> "RasterizeRequest":
        if (self.source is None) == (self.program is None):
            raise ValueError("provide exactly one of source or program")
        return self

    @field_validator("scale")
    @classmethod
    def _positive_scale(cls, v: float) -> float:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"scale must be positive and finite, got {v}")
        return v


class RasterizeResponse(BaseModel):
    width: int
    height: int
    ink_area: int
    pgm_base64: str
    warnings: list[str] = Field(default_factory=list)


class GroundRequest(BaseModel):
    source: str | None = None
    program: ProgramModel | None = None
    groundings: GroundingSetModel
    scale: float = 100.0

    @model_validator(mode="after")
    def _exactly_one_input(self) -> "GroundRequest":
        if (self.source is None) == (self.program is None):
            raise ValueError("provide exactly one of source or program")
        return self


class GroundResponse(BaseModel):
    width: int
    height: int
    components: list[ComponentModel]
    matches: list[MatchModel]


# -- prompt / query ------------------------------------------------------


class ObjectSpecModel(BaseModel):
    name: str
    center: XY | None = None
    size: XY | None = None

    @classmethod
    def from_core(cls, o: ObjectSpec) -> "ObjectSpecModel":
        return cls(name=o.name, center=o.center, size=o.size)

    def to_core(self) -> ObjectSpec:
        return ObjectSpec(name=self.name, center=self.center, size=self.size)


class PromptSpecModel(BaseModel):
    objects: list[ObjectSpecModel]
    relation: str | None = None
    canvas_cm: float = 5.12

    @classmethod
    def from_core(cls, s: PromptSpec) -> "PromptSpecModel":
        return cls(
            objects=[ObjectSpecModel.from_core(o) for o in s.objects],
            relation=s.relation,
            canvas_cm=s.canvas_cm,
        )

    def to_core(self) -> PromptSpec:
        return PromptSpec(
            objects=[o.to_core() for o in self.objects],
            relation=self.relation,
            canvas_cm=self.canvas_cm,
        )


class PromptRequest(BaseModel):
    spec: PromptSpecModel


class PromptResponse(BaseModel):
    prompt: str


TRANSPORT_MODES = ("live", "replay", "record")


class TransportConfigModel(BaseModel):
    mode: str = "replay"
    fixtures_dir: str | None = None
    base_url: str | None = None
    model: str | None = None
    api_key: str | None = None

    @model_validator(mode="after")
    def _mode_requirements(self) -> "TransportConfigModel":
        if self.mode not in TRANSPORT_MODES:
            raise ValueError(f"transport mode must be one of {TRANSPORT_MODES}, got {self.mode!r}")
        if self.mode in ("replay", "record") and not self.fixtures_dir:
            raise ValueError(f"{self.mode} transport requires fixtures_dir")
        return self


class SummaryEntryModel(BaseModel):
    name: str
    position: XY


class QueryRequest(BaseModel):
    spec: PromptSpecModel
    transport: TransportConfigModel = Field(default_factory=TransportConfigModel)


class QueryResponse(BaseModel):
    prompt: str
    status: str
    raw_response: str
    code_block: str | None = None
    summary: list[SummaryEntryModel] | None = None
    program: ProgramModel | None = None
    groundings: GroundingSetModel | None = None
    error: str | None = None
    warnings: list[str] = Field(default_factory=list)

    @classmethod
    def from_core(cls, r: QueryResult) -> "QueryResponse":
        return cls(
            prompt=r.prompt,
            status=r.status,
            raw_response=r.response.raw_text,
            code_block=r.response.code_block,
            summary=(
                None
                if r.response.summary is None
                else [SummaryEntryModel(name=e.name, position=e.position) for e in r.response.summary]
            ),
            program=None if r.program is None else ProgramModel.from_core(r.program),
            groundings=None if r.groundings is None else GroundingSetModel.from_core(r.groundings),
            error=r.error,
            warnings=list(r.warnings or []),
        )


class BatchQueryRequest(BaseModel):
    specs: list[PromptSpecModel]
    transport: TransportConfigModel = Field(default_factory=TransportConfigModel)

    @field_validator("specs")
    @classmethod
    def _non_empty(cls, v: list[PromptSpecModel]) -> list[PromptSpecModel]:
        if not v:
            raise ValueError("specs must be non-empty")
        return v


class TallyModel(BaseModel):
    total: int
    ok: int
    no_summary: int
    empty: int
    non_runnable: int
    empty_or_non_runnable: int
    instruction_errors: int | None = None


class BatchQueryResponse(BaseModel):
    results: list[QueryResponse]
    tally: TallyModel
    tally_csv: str


# -- dataset / evaluate / pipeline --------------------------------------


class BuildDatasetRequest(BaseModel):
    captions_path: str
    instances_path: str
    out_dir: str
    limit: int | None = None
    all_captions: bool = False
    outline: bool = False
    jobs: int = 1

    @field_validator("jobs")
    @classmethod
    def _jobs_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"jobs must be >= 1, got {v}")
        return v


class BuildDatasetResponse(BaseModel):
    rows_written: int
    images_failed: int
    manifest_path: str
    sketch_dir: str


class EvaluateRequest(BaseModel):
    detections_path: str
    ground_truth_path: str
    eps_frac: float = 0.039
    samples_per_prompt: int = 4
    score_threshold: float = 0.1
    euclidean: bool = False
    include_placement: bool | None = None
    jobs: int = 1
    out_path: str | None = None
    fmt: str = "csv"

    @field_validator("fmt")
    @classmethod
    def _known_format(cls, v: str) -> str:
        if v not in ("csv", "text"):
            raise ValueError(f"fmt must be csv or text, got {v!r}")
        return v


class MetricRowModel(BaseModel):
    section: str
    metric: str
    value: float | None  # null for undefined (0/0) rates


class EvaluateResponse(BaseModel):
    rows: list[MetricRowModel]
    csv: str
    text: str
    out_path: str | None = None


class PipelineRequest(BaseModel):
    spec: PromptSpecModel
    out_dir: str
    transport: TransportConfigModel = Field(default_factory=TransportConfigModel)
    scale: float = 100.0


class PipelineResponse(BaseModel):
    status: str
    run_dir: str
    files: list[str]
    components: list[ComponentModel] = Field(default_factory=list)
    matches: list[MatchModel] = Field(default_factory=list)
    error: str | None = None
    warnings: list[str] = Field(default_factory=list)


class HealthResponse(BaseModel):
    status: str
    version: str

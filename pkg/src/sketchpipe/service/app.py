"""FastAPI application exposing the core operations over HTTP.

The CLI talks to this app in-process by default; running it behind uvicorn
gives the same contract over a socket.  Structured library errors map to 422,
transport failures to 502 and filesystem problems to 500, each carrying the
error's code/message/position payload.
"""

from __future__ import annotations

import base64
import json
import math
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from sketchpipe import __version__
from sketchpipe.dataset.annotations import load_annotations as load_dataset_annotations
from sketchpipe.dataset.builder import build_triplets
from sketchpipe.errors import IoError, SketchPipeError
from sketchpipe.gateway.prompts import build_prompt
from sketchpipe.gateway.runner import run_query, tally
from sketchpipe.gateway.transport import (
    FixtureTransport,
    HttpTransport,
    RecordingTransport,
    Transport,
    TransportError,
)
from sketchpipe.metrics.records import load_detections, load_ground_truth
from sketchpipe.metrics.report import compute_report, emit_csv, emit_report, emit_text
from sketchpipe.raster.components import label_components, match_components
from sketchpipe.raster.render import rasterize
from sketchpipe.service.schemas import (
    BatchQueryRequest,
    BatchQueryResponse,
    BuildDatasetRequest,
    BuildDatasetResponse,
    ComponentModel,
    EvaluateRequest,
    EvaluateResponse,
    GroundRequest,
    GroundResponse,
    HealthResponse,
    MatchModel,
    MetricRowModel,
    ParseRequest,
    ParseResponse,
    PipelineRequest,
    PipelineResponse,
    ProgramModel,
    PromptRequest,
    PromptResponse,
    QueryRequest,
    QueryResponse,
    RasterizeRequest,
    RasterizeResponse,
    TallyModel,
    TransportConfigModel,
)
from sketchpipe.tikz.ast import SketchProgram
from sketchpipe.tikz.parser import parse
from sketchpipe.tikz.printer import pretty_print


def build_transport(cfg: TransportConfigModel) -> Transport:
    if cfg.mode == "replay":
        return FixtureTransport(cfg.fixtures_dir)
    if cfg.base_url:
        if not cfg.model:
            raise TransportError("an explicit base_url also needs a model name")
        live: Transport = HttpTransport(
            base_url=cfg.base_url, model=cfg.model, api_key=cfg.api_key
        )
    else:
        live = HttpTransport.from_env()
    if cfg.mode == "record":
        return RecordingTransport(live, cfg.fixtures_dir)
    return live


def _program_from(source: str | None, model: ProgramModel | None) -> SketchProgram:
    if source is not None:
        return parse(source)
    assert model is not None  # request validator enforces exactly one input
    try:
        return model.to_core()
    except ValueError as exc:
        raise SketchPipeError(str(exc)) from exc


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def create_app() -> FastAPI:
    app = FastAPI(title="sketchpipe", version=__version__)

    @app.exception_handler(SketchPipeError)
    async def _on_library_error(request: Request, exc: SketchPipeError):
        return JSONResponse(status_code=422, content={"error": exc.to_dict()})

    @app.exception_handler(TransportError)
    async def _on_transport_error(request: Request, exc: TransportError):
        return JSONResponse(status_code=502, content={"error": exc.to_dict()})

    @app.exception_handler(IoError)
    async def _on_io_error(request: Request, exc: IoError):
        return JSONResponse(status_code=500, content={"error": exc.to_dict()})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/parse", response_model=ParseResponse)
    def parse_endpoint(req: ParseRequest) -> ParseResponse:
        program = parse(req.source)
        return ParseResponse(
            program=ProgramModel.from_core(program),
            pretty=pretty_print(program),
            command_count=len(program.commands),
        )

    @app.post("/rasterize", response_model=RasterizeResponse)
    def rasterize_endpoint(req: RasterizeRequest) -> RasterizeResponse:
        program = _program_from(req.source, req.program)
        bitmap = rasterize(program, scale=req.scale, provenance=req.provenance)
        return RasterizeResponse(
            width=bitmap.width,
            height=bitmap.height,
            ink_area=bitmap.ink_area,
            pgm_base64=base64.b64encode(bitmap.to_pgm()).decode("ascii"),
            warnings=list(bitmap.warnings),
        )

    @app.post("/ground", response_model=GroundResponse)
    def ground_endpoint(req: GroundRequest) -> GroundResponse:
        program = _program_from(req.source, req.program)
        bitmap = rasterize(program, scale=req.scale)
        component_set = label_components(bitmap)
        matches = match_components(component_set, req.groundings.to_core(), scale=req.scale)
        return GroundResponse(
            width=bitmap.width,
            height=bitmap.height,
            components=[ComponentModel.from_core(c) for c in component_set.components],
            matches=[MatchModel.from_core(m) for m in matches],
        )

    @app.post("/prompt", response_model=PromptResponse)
    def prompt_endpoint(req: PromptRequest) -> PromptResponse:
        return PromptResponse(prompt=build_prompt(req.spec.to_core()))

    @app.post("/query", response_model=QueryResponse)
    def query_endpoint(req: QueryRequest) -> QueryResponse:
        transport = build_transport(req.transport)
        return QueryResponse.from_core(run_query(req.spec.to_core(), transport))

    @app.post("/query/batch", response_model=BatchQueryResponse)
    def batch_query_endpoint(req: BatchQueryRequest) -> BatchQueryResponse:
        transport = build_transport(req.transport)
        results = [run_query(spec.to_core(), transport) for spec in req.specs]
        table = tally((str(i), r.status) for i, r in enumerate(results))
        return BatchQueryResponse(
            results=[QueryResponse.from_core(r) for r in results],
            tally=TallyModel(
                total=table.total,
                ok=table.ok,
                no_summary=table.no_summary,
                empty=table.empty,
                non_runnable=table.non_runnable,
                empty_or_non_runnable=table.empty_or_non_runnable,
                instruction_errors=table.instruction_errors,
            ),
            tally_csv=table.to_csv(),
        )

    @app.post("/dataset/build", response_model=BuildDatasetResponse)
    def build_dataset_endpoint(req: BuildDatasetRequest) -> BuildDatasetResponse:
        source = load_dataset_annotations(req.captions_path, req.instances_path)
        summary = build_triplets(
            source,
            req.out_dir,
            limit=req.limit,
            all_captions=req.all_captions,
            outline=req.outline,
            jobs=req.jobs,
        )
        return BuildDatasetResponse(
            rows_written=summary.rows_written,
            images_failed=summary.images_failed,
            manifest_path=str(summary.manifest_path),
            sketch_dir=str(summary.sketch_dir),
        )

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate_endpoint(req: EvaluateRequest) -> EvaluateResponse:
        records = load_detections(req.detections_path)
        gts = load_ground_truth(req.ground_truth_path)
        report = compute_report(
            records,
            gts,
            eps_frac=req.eps_frac,
            samples_per_prompt=req.samples_per_prompt,
            thresh=req.score_threshold,
            euclidean=req.euclidean,
            include_placement=req.include_placement,
            jobs=req.jobs,
        )
        out_path = None
        if req.out_path:
            emit_report(report, req.out_path, fmt=req.fmt)
            out_path = req.out_path
        rows = [
            MetricRowModel(
                section=section,
                metric=metric,
                value=None if math.isnan(value) else value,
            )
            for section, metric, value in report.rows()
        ]
        return EvaluateResponse(
            rows=rows, csv=emit_csv(report), text=emit_text(report), out_path=out_path
        )

    @app.post("/pipeline", response_model=PipelineResponse)
    def pipeline_endpoint(req: PipelineRequest) -> PipelineResponse:
        transport = build_transport(req.transport)
        result = run_query(req.spec.to_core(), transport)
        run_dir = Path(req.out_dir)
        try:
            run_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create run directory {run_dir}: {exc}") from exc

        files: list[str] = []

        def record(name: str) -> Path:
            files.append(name)
            return run_dir / name

        record("prompt.txt").write_text(result.prompt + "\n", encoding="utf-8")
        exchange = QueryResponse.from_core(result).model_dump()
        exchange.pop("program", None)
        exchange.pop("groundings", None)
        _dump_json(record("response.json"), exchange)

        components: list[ComponentModel] = []
        matches: list[MatchModel] = []
        if result.program is not None:
            _dump_json(
                record("program.json"), ProgramModel.from_core(result.program).model_dump()
            )
            bitmap = rasterize(result.program, scale=req.scale)
            bitmap.save_pgm(record("sketch.pgm"))
            component_set = label_components(bitmap)
            components = [ComponentModel.from_core(c) for c in component_set.components]
            _dump_json(record("components.json"), [c.model_dump() for c in components])
            if result.groundings is not None:
                result.groundings.save_json(record("groundings.json"))
                matched = match_components(component_set, result.groundings, scale=req.scale)
                matches = [MatchModel.from_core(m) for m in matched]
                _dump_json(record("matches.json"), [m.model_dump() for m in matches])

        return PipelineResponse(
            status=result.status,
            run_dir=str(run_dir),
            files=files,
            components=components,
            matches=matches,
            error=result.error,
            warnings=list(result.warnings or []),
        )

    return app

"""Query orchestration and compile-status tallies."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from sketchpipe.errors import IoError
from sketchpipe.gateway.prompts import PromptSpec, build_prompt
from sketchpipe.gateway.response import LlmResponse, parse_response
from sketchpipe.gateway.transport import Transport
from sketchpipe.grounding import MAX_GROUNDINGS, GroundingEntry, GroundingSet
from sketchpipe.tikz import SketchProgram, TikzError, parse
from sketchpipe.tikz.ast import Point

STATUS_OK = "ok"
STATUS_EMPTY = "empty"
STATUS_NON_RUNNABLE = "non_runnable"
STATUS_NO_SUMMARY = "no_summary"

STATUSES = (STATUS_OK, STATUS_EMPTY, STATUS_NON_RUNNABLE, STATUS_NO_SUMMARY)


@dataclass
class QueryResult:
    prompt: str
    response: LlmResponse
    status: str
    program: SketchProgram | None = None
    groundings: GroundingSet | None = None
    error: str | None = None  # parse failure detail for non_runnable
    warnings: list[str] | None = None


def _groundings_from_summary(response: LlmResponse) -> tuple[GroundingSet | None, list[str]]:
    if response.summary is None:
        return None, []
    warnings = []
    entries = [
        GroundingEntry(name=e.name, center=Point(e.position[0], e.position[1]))
        for e in response.summary
    ]
    if len(entries) > MAX_GROUNDINGS:
        warnings.append(
            f"summary listed {len(entries)} objects; keeping the first {MAX_GROUNDINGS}"
        )
        entries = entries[:MAX_GROUNDINGS]
    return GroundingSet(entries=entries, source="llm"), warnings


def run_query(spec: PromptSpec, transport: Transport) -> QueryResult:
    """Build the prompt, obtain raw text, and classify the response.

    Status: ``empty`` (no code block), ``non_runnable`` (code fails to parse),
    ``no_summary`` (code ok, no summary), ``ok`` (code and summary).
    """
    prompt = build_prompt(spec)
    raw = transport.complete(prompt)
    response = parse_response(raw)

    if response.code_block is None:
        return QueryResult(prompt=prompt, response=response, status=STATUS_EMPTY)
    try:
        program = parse(response.code_block)
    except TikzError as exc:
        return QueryResult(
            prompt=prompt, response=response, status=STATUS_NON_RUNNABLE, error=str(exc)
        )
    groundings, warnings = _groundings_from_summary(response)
    status = STATUS_OK if groundings is not None else STATUS_NO_SUMMARY
    return QueryResult(
        prompt=prompt,
        response=response,
        status=status,
        program=program,
        groundings=groundings,
        warnings=warnings or None,
    )


@dataclass
class TallyTable:
    """Compile-status counts in the shape of the sketch-evaluation table.

    ``empty_or_non_runnable`` is the automated column; the instruction-error
    column needs human annotations and reads "n/a" without them.  Raw counts
    are reported alongside; rate denominators are left to the reader.
    """

    total: int
    ok: int
    no_summary: int
    empty: int
    non_runnable: int
    instruction_errors: int | None = None

    @property
    def empty_or_non_runnable(self) -> int:
        return self.empty + self.non_runnable

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "value"])
        writer.writerow(["queries", self.total])
        writer.writerow(
            [
                "# of errors w.r.t instructions",
                self.instruction_errors if self.instruction_errors is not None else "n/a",
            ]
        )
        writer.writerow(["# of empty image or non-runnable code", self.empty_or_non_runnable])
        writer.writerow(["ok", self.ok])
        writer.writerow(["no_summary", self.no_summary])
        writer.writerow(["empty", self.empty])
        writer.writerow(["non_runnable", self.non_runnable])
        return buf.getvalue()


def tally(
    statuses: Iterable[tuple[str, str]],
    annotations: Mapping[str, bool] | None = None,
) -> TallyTable:
    """Count statuses given as (query_id, status) pairs.

    ``annotations`` maps query id -> instruction-error flag (human judgment);
    without it that column is None.
    """
    counts = {s: 0 for s in STATUSES}
    total = 0
    errors = 0
    for query_id, status in statuses:
        if status not in counts:
            raise ValueError(f"unknown status {status!r} for query {query_id!r}")
        counts[status] += 1
        total += 1
        if annotations is not None and annotations.get(query_id, False):
            errors += 1
    if total == 0:
        raise ValueError("tally needs at least one status")
    return TallyTable(
        total=total,
        ok=counts[STATUS_OK],
        no_summary=counts[STATUS_NO_SUMMARY],
        empty=counts[STATUS_EMPTY],
        non_runnable=counts[STATUS_NON_RUNNABLE],
        instruction_errors=errors if annotations is not None else None,
    )


def load_annotations(path: str | Path) -> dict[str, bool]:
    """Read a JSON object mapping query id -> instruction-error boolean."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise IoError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise IoError(f"{path} must hold a JSON object of id -> boolean")
    return {str(k): bool(v) for k, v in obj.items()}

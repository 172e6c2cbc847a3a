"""Prompt construction, LLM transports, response parsing and status tallies."""

from sketchpipe.gateway.prompts import InvalidSpec, ObjectSpec, PromptSpec, build_prompt
from sketchpipe.gateway.response import LlmResponse, SummaryEntry, parse_response
from sketchpipe.gateway.runner import (
    STATUS_EMPTY,
    STATUS_NO_SUMMARY,
    STATUS_NON_RUNNABLE,
    STATUS_OK,
    QueryResult,
    TallyTable,
    run_query,
    tally,
)
from sketchpipe.gateway.transport import (
    FixtureTransport,
    HttpTransport,
    RecordingTransport,
    Transport,
    TransportError,
    prompt_key,
)

__all__ = [
    "FixtureTransport",
    "HttpTransport",
    "InvalidSpec",
    "LlmResponse",
    "ObjectSpec",
    "PromptSpec",
    "QueryResult",
    "RecordingTransport",
    "STATUS_EMPTY",
    "STATUS_NON_RUNNABLE",
    "STATUS_NO_SUMMARY",
    "STATUS_OK",
    "SummaryEntry",
    "TallyTable",
    "Transport",
    "TransportError",
    "build_prompt",
    "parse_response",
    "prompt_key",
    "run_query",
    "tally",
]

"""Extraction of code blocks and drawing summaries from raw LLM text.

Absence is data here: a missing code block or summary yields None fields, not
errors, so the runner can classify the response instead of failing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

_CODE_RE = re.compile(r"\\begin\{tikzpicture\}.*?\\end\{tikzpicture\}", re.DOTALL)
_SUMMARY_MARKER_RE = re.compile(r"summary\s+of\s+the\s+drawing", re.IGNORECASE)

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)"
# One summary entry, tolerant of quote style ('`"), "=" for ":", a "$" before
# values, and a trailing comma - LLM responses mix these freely.
_ENTRY_RE = re.compile(
    r"\{\s*[`'\"]?object[\s_]*name[`'\"]?\s*[:=]\s*\$?\s*(?P<name>[^,}]+?)\s*,"
    r"\s*[`'\"]?position[`'\"]?\s*[:=]\s*\$?\s*\(\s*(?P<x>" + _NUM + r")\s*,"
    r"\s*(?P<y>" + _NUM + r")\s*\)\s*\$?\s*,?\s*\}",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class SummaryEntry:
    name: str
    position: tuple[float, float]


@dataclass
class LlmResponse:
    raw_text: str
    code_block: str | None
    summary: list[SummaryEntry] | None


def _clean_name(raw: str) -> str:
    return raw.strip().strip("`'\"$").strip()


def parse_response(raw: str) -> LlmResponse:
    """Pull the first tikzpicture span and any drawing-summary entries."""
    code_match = _CODE_RE.search(raw)
    code_block = code_match.group(0) if code_match else None

    summary: list[SummaryEntry] | None = None
    marker = _SUMMARY_MARKER_RE.search(raw)
    if marker:
        entries = []
        for m in _ENTRY_RE.finditer(raw, marker.end()):
            name = _clean_name(m.group("name"))
            x, y = float(m.group("x")), float(m.group("y"))
            if name and math.isfinite(x) and math.isfinite(y):
                entries.append(SummaryEntry(name=name, position=(x, y)))
        if entries:
            summary = entries
    return LlmResponse(raw_text=raw, code_block=code_block, summary=summary)

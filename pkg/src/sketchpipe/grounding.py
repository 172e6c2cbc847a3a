"""Grounding records: named object centers (and optional sizes) in sketch cm.

Shared by the gateway (summaries), the dataset builder (bbox centers) and the
conditioning reference (token inputs).  At most 30 entries ride along per
image; producers truncate, consumers reject.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from sketchpipe.errors import IoError
from sketchpipe.tikz.ast import Point

MAX_GROUNDINGS = 30

_SOURCES = ("llm", "dataset", "manual")


@dataclass(frozen=True)
class GroundingEntry:
    name: str
    center: Point
    size: tuple[float, float] | None = None


@dataclass
class GroundingSet:
    entries: list[GroundingEntry] = field(default_factory=list)
    source: str = "manual"

    def validate(self) -> None:
        if self.source not in _SOURCES:
            raise ValueError(f"source must be one of {_SOURCES}, got {self.source!r}")
        if len(self.entries) > MAX_GROUNDINGS:
            raise ValueError(f"at most {MAX_GROUNDINGS} groundings allowed, got {len(self.entries)}")
        for e in self.entries:
            if not e.name:
                raise ValueError("grounding names must be non-empty")
            if not e.center.is_finite():
                raise ValueError(f"grounding {e.name!r} has a non-finite center")

    def to_obj(self) -> dict:
        return {
            "source": self.source,
            "entries": [
                {
                    "name": e.name,
                    "center": [e.center.x, e.center.y],
                    "size": list(e.size) if e.size is not None else None,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "GroundingSet":
        entries = [
            GroundingEntry(
                name=item["name"],
                center=Point(float(item["center"][0]), float(item["center"][1])),
                size=tuple(float(v) for v in item["size"]) if item.get("size") else None,
            )
            for item in obj.get("entries", [])
        ]
        gs = cls(entries=entries, source=obj.get("source", "manual"))
        gs.validate()
        return gs

    def save_json(self, path: str | Path) -> None:
        try:
            Path(path).write_text(json.dumps(self.to_obj(), indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc

    @classmethod
    def load_json(cls, path: str | Path) -> "GroundingSet":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        return cls.from_obj(json.loads(text))

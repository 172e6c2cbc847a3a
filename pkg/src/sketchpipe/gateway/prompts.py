"""Prompt specs and template-based prompt construction.

The two templates live as package data files so their wording stays auditable;
the quirks of the originals (including the misspelling "separted" and the
"at the position"/"at position" asymmetry) are preserved on purpose.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from sketchpipe.errors import SketchPipeError
from sketchpipe.grounding import MAX_GROUNDINGS
from sketchpipe.tikz.ast import DEFAULT_CANVAS_CM

RELATIONS = ("left", "right", "above", "below")

RELATION_PHRASES = {
    "left": "to the left of",
    "right": "to the right of",
    "above": "above",
    "below": "below",
}


class InvalidSpec(SketchPipeError):
    """The prompt spec does not describe a supported query."""

    code = "InvalidSpec"


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    center: tuple[float, float] | None = None
    size: tuple[float, float] | None = None


@dataclass
class PromptSpec:
    """What to ask the model: 1-30 named objects, optionally a binary relation,
    optionally per-object centers and sizes (cm on the 5.12 cm canvas)."""

    objects: list[ObjectSpec] = field(default_factory=list)
    relation: str | None = None
    canvas_cm: float = DEFAULT_CANVAS_CM

    def validate(self) -> None:
        if not 1 <= len(self.objects) <= MAX_GROUNDINGS:
            raise InvalidSpec(
                f"spec needs between 1 and {MAX_GROUNDINGS} objects, got {len(self.objects)}"
            )
        for obj in self.objects:
            if not obj.name or not obj.name.strip():
                raise InvalidSpec("object names must be non-empty")
            if obj.center is not None:
                x, y = obj.center
                if not (0 <= x <= self.canvas_cm and 0 <= y <= self.canvas_cm):
                    raise InvalidSpec(
                        f"center ({x:g}, {y:g}) of {obj.name!r} lies outside the canvas"
                    )
            if obj.size is not None:
                w, h = obj.size
                if not (0 < w <= self.canvas_cm and 0 < h <= self.canvas_cm):
                    raise InvalidSpec(f"size ({w:g}, {h:g}) of {obj.name!r} is not drawable")
        if self.relation is not None:
            if self.relation not in RELATIONS:
                raise InvalidSpec(f"relation must be one of {RELATIONS}, got {self.relation!r}")
            if len(self.objects) != 2:
                raise InvalidSpec("a relation requires exactly 2 objects")


def _load_template(name: str) -> str:
    text = resources.files("sketchpipe.gateway").joinpath(f"templates/{name}").read_text("utf-8")
    return text.rstrip("\n")


def _article(name: str) -> str:
    return "an" if name[:1].lower() in "aeiou" else "a"


def _fmt_cm(v: float) -> str:
    if v == int(v):
        return f"{v:.1f}"
    return repr(v)


def _substitute(template: str, mapping: dict[str, str]) -> str:
    # Plain replacement, not str.format: the relation template contains
    # literal braces in its summary-format clause.
    out = template
    for key, value in mapping.items():
        out = out.replace("{" + key + "}", value)
    return out


def build_prompt(spec: PromptSpec) -> str:
    """Render a PromptSpec through the matching template.

    Relation-only specs (two plain objects) use the relation template;
    two objects with centers and sizes use the position/size template.
    Anything else has no template and raises :class:`InvalidSpec`.
    """
    spec.validate()
    if spec.relation is None:
        raise InvalidSpec("templates cover relation queries only; set a relation")
    a, b = spec.objects
    base = {
        "object_a": a.name,
        "object_b": b.name,
        "object_a_art": f"{_article(a.name)} {a.name}",
        "object_b_art": f"{_article(b.name)} {b.name}",
        "relation": RELATION_PHRASES[spec.relation],
    }
    positioned = a.center is not None or a.size is not None or b.center is not None or b.size is not None
    if not positioned:
        return _substitute(_load_template("relation_prompt.txt"), base)
    if a.center is None or a.size is None or b.center is None or b.size is None:
        raise InvalidSpec("position/size prompts need a center and size for both objects")
    base.update(
        {
            "ax": _fmt_cm(a.center[0]),
            "ay": _fmt_cm(a.center[1]),
            "aw": _fmt_cm(a.size[0]),
            "ah": _fmt_cm(a.size[1]),
            "bx": _fmt_cm(b.center[0]),
            "by": _fmt_cm(b.center[1]),
            "bw": _fmt_cm(b.size[0]),
            "bh": _fmt_cm(b.size[1]),
        }
    )
    return _substitute(_load_template("position_size_prompt.txt"), base)

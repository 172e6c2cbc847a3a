"""Evaluation metrics: spatial-relation scoring and position/size scoring
over object-detection records."""

from sketchpipe.metrics.position_size import (
    DEFAULT_EPS_FRAC,
    MissingSpec,
    ObjectScore,
    PositionSizeCounts,
    merge_position_size,
    position_size,
    score_object,
    target_px,
)
from sketchpipe.metrics.records import (
    CANVAS_PX,
    Detection,
    DetectionRecord,
    ObjectTarget,
    PromptGroundTruth,
    RecordError,
    load_detections,
    load_ground_truth,
    normalize_label,
    save_detections,
)
from sketchpipe.metrics.report import (
    MetricsReport,
    compute_report,
    emit_csv,
    emit_report,
    emit_text,
    parse_csv,
)
from sketchpipe.metrics.visor import (
    DEFAULT_SAMPLES_PER_PROMPT,
    DEFAULT_SCORE_THRESHOLD,
    CorrectnessFlags,
    IncompleteGroup,
    RelationBreakdown,
    VisorCounts,
    best_detection,
    image_correctness,
    merge_relations,
    merge_visor,
    per_relation,
    relation_holds,
    visor,
)

__all__ = [
    "CANVAS_PX",
    "CorrectnessFlags",
    "DEFAULT_EPS_FRAC",
    "DEFAULT_SAMPLES_PER_PROMPT",
    "DEFAULT_SCORE_THRESHOLD",
    "Detection",
    "DetectionRecord",
    "IncompleteGroup",
    "MetricsReport",
    "MissingSpec",
    "ObjectScore",
    "ObjectTarget",
    "PositionSizeCounts",
    "PromptGroundTruth",
    "RecordError",
    "RelationBreakdown",
    "VisorCounts",
    "best_detection",
    "compute_report",
    "emit_csv",
    "emit_report",
    "emit_text",
    "image_correctness",
    "load_detections",
    "load_ground_truth",
    "merge_position_size",
    "merge_relations",
    "merge_visor",
    "normalize_label",
    "parse_csv",
    "per_relation",
    "position_size",
    "relation_holds",
    "save_detections",
    "score_object",
    "target_px",
    "visor",
]

"""COCO-caption + LVIS-instance ingestion and triplet manifest construction."""

from sketchpipe.dataset.annotations import (
    AnnotationSource,
    CaptionAnn,
    IdCollision,
    ImageInfo,
    InstanceAnn,
    LoadReport,
    SchemaError,
    load_annotations,
)
from sketchpipe.dataset.builder import (
    MANIFEST_KEYS,
    BuildSummary,
    RenderError,
    TripletRecord,
    build_triplets,
    read_manifest,
)

__all__ = [
    "AnnotationSource",
    "BuildSummary",
    "CaptionAnn",
    "IdCollision",
    "ImageInfo",
    "InstanceAnn",
    "LoadReport",
    "MANIFEST_KEYS",
    "RenderError",
    "SchemaError",
    "TripletRecord",
    "build_triplets",
    "load_annotations",
    "read_manifest",
]

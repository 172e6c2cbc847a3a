"""Numeric reference for the conditioning machinery.

Fourier position embeddings, seeded name embeddings, token fusion and a toy
zero-convolution control branch, all in float64 numpy with analytic gradients
where training-relevant.  No deep-learning framework is involved: exactness of
the zero-init identity and platform-stable determinism are the goals, not
throughput.
"""

from sketchpipe.control.branch import (
    BranchConfig,
    ShapeMismatch,
    StageSpec,
    ToyControlBranch,
    combine_with_backbone,
    control_forward,
    dump_residuals,
    load_residuals,
    stub_backbone,
)
from sketchpipe.control.embeddings import EmptyName, NameEmbedder, SeededNameEmbedder, embed_name
from sketchpipe.control.fourier import FourierConfig, fourier_embed
from sketchpipe.control.fusion import (
    ControlTokens,
    FusionParams,
    TooManyGroundings,
    fuse_tokens,
)
from sketchpipe.control.gradcheck import grad_check, sum_squares_loss

__all__ = [
    "BranchConfig",
    "ControlTokens",
    "EmptyName",
    "FourierConfig",
    "FusionParams",
    "NameEmbedder",
    "SeededNameEmbedder",
    "ShapeMismatch",
    "StageSpec",
    "TooManyGroundings",
    "ToyControlBranch",
    "combine_with_backbone",
    "control_forward",
    "dump_residuals",
    "embed_name",
    "fourier_embed",
    "fuse_tokens",
    "grad_check",
    "load_residuals",
    "stub_backbone",
    "sum_squares_loss",
]

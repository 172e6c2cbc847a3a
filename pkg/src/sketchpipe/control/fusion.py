"""Grounding-token construction and fusion with image tokens.

Per grounding object the position's Fourier features are concatenated with the
name embedding and sent through one learned projection (784 -> 768); the
resulting grounding tokens are row-concatenated in front of the image tokens.
Concatenation is order-preserving, so permuting groundings permutes rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sketchpipe.control.embeddings import D_MODEL, NameEmbedder, SeededNameEmbedder
from sketchpipe.control.fourier import DEFAULT_FOURIER, FourierConfig, fourier_embed
from sketchpipe.errors import SketchPipeError
from sketchpipe.grounding import MAX_GROUNDINGS, GroundingSet


class TooManyGroundings(SketchPipeError):
    """More grounding entries than the 30-token budget."""

    code = "TooManyGroundings"


class ShapeMismatch(SketchPipeError):
    """An array does not have the shape the operation requires."""

    code = "ShapeMismatch"


@dataclass
class FusionParams:
    """The projection applied to concat(fourier, name) vectors."""

    projection: np.ndarray  # (d_model, fourier_dim + name_dim)

    @classmethod
    def seeded(
        cls,
        seed: int = 0,
        d_model: int = D_MODEL,
        fourier_dim: int = DEFAULT_FOURIER.dim,
        name_dim: int = D_MODEL,
    ) -> "FusionParams":
        d_in = fourier_dim + name_dim
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x66757365])))
        projection = rng.standard_normal((d_model, d_in)) / np.sqrt(d_in)
        return cls(projection=projection)


@dataclass
class ControlTokens:
    """Grounding tokens stacked above image tokens, with an attention mask.

    ``mask`` has one entry per fused row; padding rows (present only when
    ``pad_to`` was requested) carry 0 and must not be attended.
    """

    grounding_tokens: np.ndarray  # (n, d_model)
    image_tokens: np.ndarray  # (k, d_model)
    fused: np.ndarray  # (n_padded + k, d_model)
    mask: np.ndarray  # (n_padded + k,) of {0.0, 1.0}


def fuse_tokens(
    groundings: GroundingSet,
    image_tokens: np.ndarray,
    params: FusionParams,
    embedder: NameEmbedder | None = None,
    fourier_cfg: FourierConfig = DEFAULT_FOURIER,
    pad_to: int | None = None,
) -> ControlTokens:
    """Build grounding tokens and concatenate them with image tokens.

    ``pad_to`` right-pads the grounding block with zero rows up to a fixed
    count (masked out), which gives batches a uniform shape.
    """
    n = len(groundings.entries)
    if n > MAX_GROUNDINGS:
        raise TooManyGroundings(f"{n} groundings exceed the {MAX_GROUNDINGS}-token budget")
    d_model, d_in = params.projection.shape
    image_tokens = np.asarray(image_tokens, dtype=np.float64)
    if image_tokens.ndim != 2 or image_tokens.shape[1] != d_model:
        raise ShapeMismatch(
            f"image tokens must be (k, {d_model}), got {image_tokens.shape}"
        )
    embedder = embedder or SeededNameEmbedder(dim=d_in - fourier_cfg.dim)
    if fourier_cfg.dim + embedder.dim != d_in:
        raise ShapeMismatch(
            f"projection expects {d_in} inputs, got fourier {fourier_cfg.dim} + name {embedder.dim}"
        )

    rows = np.zeros((n, d_model), dtype=np.float64)
    for i, entry in enumerate(groundings.entries):
        feats = np.concatenate([fourier_embed(entry.center, fourier_cfg), embedder.embed(entry.name)])
        rows[i] = params.projection @ feats

    if pad_to is not None:
        if pad_to < n:
            raise ShapeMismatch(f"pad_to={pad_to} is smaller than {n} groundings")
        padded = np.zeros((pad_to, d_model), dtype=np.float64)
        padded[:n] = rows
        mask = np.concatenate(
            [np.ones(n), np.zeros(pad_to - n), np.ones(image_tokens.shape[0])]
        )
        fused = np.vstack([padded, image_tokens])
    else:
        mask = np.ones(n + image_tokens.shape[0])
        fused = np.vstack([rows, image_tokens])
    return ControlTokens(
        grounding_tokens=rows, image_tokens=image_tokens, fused=fused, mask=mask
    )

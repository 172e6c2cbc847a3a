"""Object-name embeddings.

The production system would use a text encoder here; this reference keeps the
interface and substitutes seeded pseudo-random unit vectors, stable across
runs and platforms because the generator is an explicit PCG64 seeded from the
name bytes.  Distinct names get near-orthogonal directions in 768 dims, which
is the only property downstream checks rely on.
"""

from __future__ import annotations

import hashlib
from typing import Protocol

import numpy as np

from sketchpipe.errors import SketchPipeError

D_MODEL = 768


class EmptyName(SketchPipeError):
    """Name embeddings need a non-empty name."""

    code = "EmptyName"


class NameEmbedder(Protocol):
    dim: int

    def embed(self, name: str) -> np.ndarray: ...


class SeededNameEmbedder:
    """Deterministic unit-vector embedder; the adapter point for a real encoder."""

    def __init__(self, dim: int = D_MODEL, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}

    def embed(self, name: str) -> np.ndarray:
        if not name:
            raise EmptyName("cannot embed an empty object name")
        cached = self._cache.get(name)
        if cached is not None:
            return cached
        digest = hashlib.sha256(f"name-embedding:{self.seed}:{name}".encode("utf-8")).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
        vec = rng.standard_normal(self.dim)
        vec /= np.linalg.norm(vec)
        self._cache[name] = vec
        return vec


_DEFAULT_EMBEDDER = SeededNameEmbedder()


def embed_name(name: str, embedder: NameEmbedder | None = None) -> np.ndarray:
    """Embed a name with the given embedder (default: the seeded reference)."""
    return (embedder or _DEFAULT_EMBEDDER).embed(name)

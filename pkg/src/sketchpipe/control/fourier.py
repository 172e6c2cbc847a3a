"""Fourier features of sketch positions.

A center (x, y) in canvas cm maps to a 16-dim vector: coordinates are
normalized by the canvas side (5.12 cm) and expanded as sin/cos pairs over 4
geometric frequency bands pi, 2pi, 4pi, 8pi, ordered

    [sin(2^b pi u), cos(2^b pi u), sin(2^b pi v), cos(2^b pi v)]  for b = 0..3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sketchpipe.tikz.ast import DEFAULT_CANVAS_CM, Point


@dataclass(frozen=True)
class FourierConfig:
    bands: int = 4
    normalizer: float = DEFAULT_CANVAS_CM

    @property
    def dim(self) -> int:
        # 2 coordinates x (sin, cos) x bands
        return 4 * self.bands


DEFAULT_FOURIER = FourierConfig()


def fourier_embed(center: Point | tuple[float, float], cfg: FourierConfig = DEFAULT_FOURIER) -> np.ndarray:
    """Embed a finite center point; returns a float64 vector of cfg.dim."""
    x, y = (center.x, center.y) if isinstance(center, Point) else (float(center[0]), float(center[1]))
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"center must be finite, got ({x}, {y})")
    u = x / cfg.normalizer
    v = y / cfg.normalizer
    out = np.empty(cfg.dim, dtype=np.float64)
    for b in range(cfg.bands):
        f = (2.0**b) * math.pi
        out[4 * b : 4 * b + 4] = (math.sin(f * u), math.cos(f * u), math.sin(f * v), math.cos(f * v))
    return out

"""Binary sketch bitmap with PGM/PNG serialization.

The PGM (P5) encoding is the golden-test medium: ink pixels are written as 0
(black) on a 255 (white) background, maxval 255.  Byte-exact round-trips are
part of the contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from sketchpipe.errors import IoError


@dataclass(eq=False)
class SketchBitmap:
    """A binary raster; ``pixels[row, col]`` is 1 for ink, row 0 at the top."""

    pixels: np.ndarray
    provenance: str = ""
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {self.pixels.shape}")
        self.pixels = self.pixels.astype(np.uint8, copy=False)

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def ink_area(self) -> int:
        return int(self.pixels.sum())

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.width} {self.height}\n255\n".encode("ascii")
        body = ((1 - self.pixels) * np.uint8(255)).tobytes()
        return header + body

    @classmethod
    def from_pgm(cls, data: bytes, provenance: str = "") -> "SketchBitmap":
        m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", data)
        if m is None:
            raise IoError("not a binary PGM (P5) stream")
        width, height, maxval = (int(g) for g in m.groups())
        if maxval != 255:
            raise IoError(f"unsupported PGM maxval {maxval}, expected 255")
        body = data[m.end() : m.end() + width * height]
        if len(body) != width * height:
            raise IoError("truncated PGM body")
        gray = np.frombuffer(body, dtype=np.uint8).reshape(height, width)
        return cls(pixels=(gray < 128).astype(np.uint8), provenance=provenance)

    def save_pgm(self, path: str | Path) -> None:
        try:
            Path(path).write_bytes(self.to_pgm())
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc

    @classmethod
    def load_pgm(cls, path: str | Path) -> "SketchBitmap":
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        return cls.from_pgm(data, provenance=str(path))

    def save_png(self, path: str | Path) -> None:
        from PIL import Image

        img = Image.fromarray((1 - self.pixels) * np.uint8(255), mode="L")
        try:
            img.save(Path(path), format="PNG")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc

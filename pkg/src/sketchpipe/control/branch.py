"""Toy zero-convolution control branch.

The topology contract is the five-row stage table (resolutions 64/32/16/8/8
with 3/3/3/3/1 blocks); channel widths are configuration and default far below
production scale.  Each stage output passes through a 1x1 zero convolution, so
a freshly constructed branch contributes exactly nothing to any backbone.

Everything runs in float64.  The sketch enters twice: once downsampled as the
spatial feature map, and once patchified into image tokens that one attention
block fuses with the grounding tokens; the attended image tokens are injected
back into each stage.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from sketchpipe.control.embeddings import D_MODEL, SeededNameEmbedder
from sketchpipe.control.fusion import (
    ControlTokens,
    FusionParams,
    ShapeMismatch,
    fuse_tokens,
)
from sketchpipe.errors import IoError
from sketchpipe.grounding import GroundingSet
from sketchpipe.raster.bitmap import SketchBitmap

STAGE_RESOLUTIONS = (64, 32, 16, 8, 8)
STAGE_BLOCKS = (3, 3, 3, 3, 1)
STAGE_NAMES = ("enc1", "enc2", "enc3", "enc4", "mid")

DEFAULT_CHANNELS = (8, 16, 32, 64, 64)


@dataclass(frozen=True)
class StageSpec:
    name: str
    resolution: int
    n_blocks: int
    channels: int


@dataclass
class BranchConfig:
    seed: int = 0
    channels: tuple[int, ...] = DEFAULT_CHANNELS
    d_model: int = D_MODEL
    base_resolution: int = 64
    patch_grid: int = 8  # 8x8 patches of 8x8 pixels -> 64 image tokens

    def __post_init__(self) -> None:
        self.channels = tuple(int(c) for c in self.channels)
        if len(self.channels) != len(STAGE_RESOLUTIONS):
            raise ValueError(f"channels needs {len(STAGE_RESOLUTIONS)} entries, got {self.channels}")
        if any(c <= 0 for c in self.channels):
            raise ValueError(f"channel widths must be positive, got {self.channels}")
        if self.base_resolution % self.patch_grid:
            raise ValueError("patch grid must divide the base resolution")

    @classmethod
    def from_yaml(cls, path: str | Path) -> "BranchConfig":
        try:
            obj = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
        return cls(**obj)

    def to_yaml(self, path: str | Path) -> None:
        obj = {
            "seed": self.seed,
            "channels": list(self.channels),
            "d_model": self.d_model,
            "base_resolution": self.base_resolution,
            "patch_grid": self.patch_grid,
        }
        try:
            Path(path).write_text(yaml.safe_dump(obj, sort_keys=True), encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, *tags])))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


class ZeroConv:
    """1x1 convolution initialized to exactly zero (weights and bias)."""

    def __init__(self, channels: int):
        self.weight = np.zeros((channels, channels), dtype=np.float64)
        self.bias = np.zeros(channels, dtype=np.float64)

    def parameters(self) -> list[np.ndarray]:
        return [self.weight, self.bias]

    def forward(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight.T + self.bias

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        dweight = np.einsum("hwo,hwi->oi", upstream, x)
        dbias = upstream.sum(axis=(0, 1))
        dx = upstream @ self.weight
        return [dweight, dbias], dx


class _Conv3x3:
    """3x3 convolution, padding 1, stride 1 or 2, channels-last layout."""

    def __init__(self, c_in: int, c_out: int, stride: int, rng: np.random.Generator):
        scale = 1.0 / np.sqrt(9 * c_in)
        self.weight = rng.standard_normal((c_out, c_in, 3, 3)) * scale
        self.bias = rng.standard_normal(c_out) * 0.01
        self.stride = stride

    def forward(self, x: np.ndarray) -> np.ndarray:
        h, w, _ = x.shape
        xp = np.pad(x, ((1, 1), (1, 1), (0, 0)))
        out = np.zeros((h, w, self.weight.shape[0]), dtype=np.float64)
        for dy in range(3):
            for dx in range(3):
                out += xp[dy : dy + h, dx : dx + w, :] @ self.weight[:, :, dy, dx].T
        out += self.bias
        if self.stride == 2:
            out = out[::2, ::2, :]
        return out


class _Linear:
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = rng.standard_normal((d_out, d_in)) / np.sqrt(d_in)
        self.bias = rng.standard_normal(d_out) * 0.01 if bias else None

    def forward(self, x: np.ndarray) -> np.ndarray:
        y = x @ self.weight.T
        if self.bias is not None:
            y = y + self.bias
        return y


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class ToyControlBranch:
    """Reference control branch; construct once, then forward freely."""

    def __init__(self, config: BranchConfig | None = None):
        cfg = config or BranchConfig()
        self.config = cfg
        self.stages = [
            StageSpec(name=n, resolution=r, n_blocks=b, channels=c)
            for n, r, b, c in zip(STAGE_NAMES, STAGE_RESOLUTIONS, STAGE_BLOCKS, cfg.channels)
        ]
        seed = cfg.seed
        self.fusion = FusionParams.seeded(seed, d_model=cfg.d_model)
        self.embedder = SeededNameEmbedder(dim=cfg.d_model, seed=seed)

        patch_px = (cfg.base_resolution // cfg.patch_grid) ** 2
        self.patch_embed = _Linear(patch_px, cfg.d_model, _rng(seed, 1))
        self.attn_q = _Linear(cfg.d_model, cfg.d_model, _rng(seed, 2), bias=False)
        self.attn_k = _Linear(cfg.d_model, cfg.d_model, _rng(seed, 3), bias=False)
        self.attn_v = _Linear(cfg.d_model, cfg.d_model, _rng(seed, 4), bias=False)

        ch = cfg.channels
        self.stem = _Conv3x3(1, ch[0], 1, _rng(seed, 5))
        self.blocks = [
            [_Conv3x3(ch[i], ch[i], 1, _rng(seed, 6, i, j)) for j in range(STAGE_BLOCKS[i])]
            for i in range(len(self.stages))
        ]
        # Stage transitions: halve resolution between encoder stages; the last
        # encoder hands off to the middle stage at the same resolution.
        self.transitions = [
            _Conv3x3(ch[0], ch[1], 2, _rng(seed, 7, 0)),
            _Conv3x3(ch[1], ch[2], 2, _rng(seed, 7, 1)),
            _Conv3x3(ch[2], ch[3], 2, _rng(seed, 7, 2)),
            _Conv3x3(ch[3], ch[4], 1, _rng(seed, 7, 3)),
        ]
        self.ctx_proj = [
            _Linear(cfg.d_model, ch[i], _rng(seed, 8, i), bias=False)
            for i in range(len(self.stages))
        ]
        self.zero_convs = [ZeroConv(ch[i]) for i in range(len(self.stages))]

    # -- token path ------------------------------------------------------

    def _downsample(self, sketch: SketchBitmap | np.ndarray) -> np.ndarray:
        pixels = sketch.pixels if isinstance(sketch, SketchBitmap) else np.asarray(sketch)
        if pixels.ndim != 2:
            raise ShapeMismatch(f"sketch must be 2-D, got shape {pixels.shape}")
        res = self.config.base_resolution
        h, w = pixels.shape
        if h % res or w % res:
            raise ShapeMismatch(f"sketch {h}x{w} is not a multiple of the base resolution {res}")
        fh, fw = h // res, w // res
        return (
            pixels.astype(np.float64).reshape(res, fh, res, fw).mean(axis=(1, 3))
        )

    def image_tokens(self, sketch: SketchBitmap | np.ndarray) -> np.ndarray:
        """Patchify the downsampled sketch into (patch_grid^2, d_model) tokens."""
        grid = self.config.patch_grid
        down = self._downsample(sketch)
        p = self.config.base_resolution // grid
        patches = (
            down.reshape(grid, p, grid, p).transpose(1, 3, 0, 2).reshape(p * p, grid * grid).T
        )
        return self.patch_embed.forward(patches)

    def _attend(self, fused: np.ndarray, mask: np.ndarray) -> np.ndarray:
        q = self.attn_q.forward(fused)
        k = self.attn_k.forward(fused)
        v = self.attn_v.forward(fused)
        scores = (q @ k.T) / np.sqrt(self.config.d_model)
        scores = scores + np.where(mask > 0, 0.0, -1e30)[None, :]
        return fused + _softmax(scores) @ v

    # -- forward ---------------------------------------------------------

    def forward(
        self,
        sketch: SketchBitmap | np.ndarray,
        groundings: GroundingSet | None = None,
        tokens: ControlTokens | None = None,
    ) -> list[np.ndarray]:
        """Return one residual array per stage (all zero until training moves
        the zero convolutions)."""
        cfg = self.config
        img_tokens = self.image_tokens(sketch)
        if tokens is None:
            tokens = fuse_tokens(
                groundings if groundings is not None else GroundingSet(),
                img_tokens,
                self.fusion,
                embedder=self.embedder,
            )
        elif tokens.image_tokens.shape != img_tokens.shape:
            raise ShapeMismatch(
                f"tokens carry image block {tokens.image_tokens.shape}, "
                f"sketch produced {img_tokens.shape}"
            )
        n_img = cfg.patch_grid**2
        attended = self._attend(tokens.fused, tokens.mask)
        ctx = attended[-n_img:].reshape(cfg.patch_grid, cfg.patch_grid, cfg.d_model)

        x = relu(self.stem.forward(self._downsample(sketch)[:, :, None]))
        residuals: list[np.ndarray] = []
        for i, stage in enumerate(self.stages):
            ctx_i = self.ctx_proj[i].forward(ctx)
            rep = stage.resolution // cfg.patch_grid
            ctx_up = np.repeat(np.repeat(ctx_i, rep, axis=0), rep, axis=1)
            x = x + ctx_up
            for block in self.blocks[i]:
                x = relu(block.forward(x))
            residuals.append(self.zero_convs[i].forward(x))
            if i < len(self.transitions):
                x = relu(self.transitions[i].forward(x))
        return residuals


def control_forward(
    branch: ToyControlBranch,
    sketch: SketchBitmap | np.ndarray,
    tokens: ControlTokens | None = None,
    groundings: GroundingSet | None = None,
) -> list[np.ndarray]:
    """Functional wrapper over :meth:`ToyControlBranch.forward`."""
    return branch.forward(sketch, groundings=groundings, tokens=tokens)


def stub_backbone(branch: ToyControlBranch, seed: int = 0) -> list[np.ndarray]:
    """Frozen-backbone stand-in: one deterministic array per stage, shaped
    like that stage's residual."""
    feats = []
    for i, stage in enumerate(branch.stages):
        rng = _rng(seed, 0xBACB, i)
        feats.append(rng.standard_normal((stage.resolution, stage.resolution, stage.channels)))
    return feats


def combine_with_backbone(
    backbone: list[np.ndarray], residuals: list[np.ndarray]
) -> list[np.ndarray]:
    """Additive combination, stage by stage."""
    if len(backbone) != len(residuals):
        raise ShapeMismatch(f"{len(backbone)} backbone stages vs {len(residuals)} residuals")
    out = []
    for b, r in zip(backbone, residuals):
        if b.shape != r.shape:
            raise ShapeMismatch(f"stage shape {b.shape} vs residual {r.shape}")
        out.append(b + r)
    return out


# -- residual dump format ------------------------------------------------
# magic "SKRES1", u16 record count; per record: u16 name length, utf-8 name,
# u8 ndim, ndim x u32 dims, float64 little-endian data.

_MAGIC = b"SKRES1"


def dump_residuals(path: str | Path, residuals: list[np.ndarray], names: list[str] | None = None) -> None:
    names = names or [STAGE_NAMES[i] if i < len(STAGE_NAMES) else f"stage{i}" for i in range(len(residuals))]
    if len(names) != len(residuals):
        raise ValueError("one name per residual required")
    try:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<H", len(residuals)))
            for name, arr in zip(names, residuals):
                raw = name.encode("utf-8")
                fh.write(struct.pack("<H", len(raw)))
                fh.write(raw)
                fh.write(struct.pack("<B", arr.ndim))
                fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_residuals(path: str | Path) -> list[tuple[str, np.ndarray]]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if data[: len(_MAGIC)] != _MAGIC:
        raise IoError(f"{path} is not a residual dump")
    off = len(_MAGIC)
    (count,) = struct.unpack_from("<H", data, off)
    off += 2
    out = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off : off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = struct.unpack_from("<B", data, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", data, off)
        off += 4 * ndim
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(shape).copy()
        off += 8 * n
        out.append((name, arr))
    return out

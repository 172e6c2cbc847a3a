"""Finite-difference gradient checking for the hand-written layers.

A checkable layer exposes ``parameters() -> list[ndarray]``,
``forward(x) -> ndarray`` and ``backward(x, upstream) -> (param_grads, dx)``
where ``param_grads`` aligns with ``parameters()``.  The loss is fixed to the
sum of squares of the output, so the upstream gradient is simply ``2 * y``.

``grad_check`` perturbs parameters in place and restores them; the layer must
not be shared with another thread while a check runs.
"""

from __future__ import annotations

from typing import Protocol

import numpy as np


class CheckableLayer(Protocol):
    def parameters(self) -> list[np.ndarray]: ...

    def forward(self, x: np.ndarray) -> np.ndarray: ...

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]: ...


def sum_squares_loss(y: np.ndarray) -> float:
    return float(np.sum(np.asarray(y, dtype=np.float64) ** 2))


class ProjectionLayer:
    """Adapter exposing a bare projection matrix (y = P @ x) for checking."""

    def __init__(self, projection: np.ndarray):
        self.projection = np.asarray(projection, dtype=np.float64)

    def parameters(self) -> list[np.ndarray]:
        return [self.projection]

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.projection @ x

    def backward(self, x: np.ndarray, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        return [np.outer(upstream, x)], self.projection.T @ upstream


def grad_check(
    layer: CheckableLayer,
    x: np.ndarray,
    step: float = 1e-4,
    samples: int = 10,
    seed: int = 0,
) -> float:
    """Compare analytic parameter gradients against central differences at
    ``samples`` randomly chosen parameter entries; return the worst relative
    error seen."""
    x = np.asarray(x, dtype=np.float64)
    upstream = 2.0 * layer.forward(x)
    param_grads, _ = layer.backward(x, upstream)
    params = layer.parameters()
    if len(param_grads) != len(params):
        raise ValueError("backward returned a gradient list of the wrong length")

    sizes = [p.size for p in params]
    total = sum(sizes)
    if total == 0:
        return 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    flat_picks = rng.choice(total, size=min(samples, total), replace=False)

    worst = 0.0
    for pick in flat_picks:
        idx = int(pick)
        pi = 0
        while idx >= sizes[pi]:
            idx -= sizes[pi]
            pi += 1
        param = params[pi]
        original = param.flat[idx]
        param.flat[idx] = original + step
        loss_hi = sum_squares_loss(layer.forward(x))
        param.flat[idx] = original - step
        loss_lo = sum_squares_loss(layer.forward(x))
        param.flat[idx] = original
        numeric = (loss_hi - loss_lo) / (2.0 * step)
        analytic = float(param_grads[pi].flat[idx])
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)
        worst = max(worst, rel)
    return worst

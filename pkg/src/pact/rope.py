"""Rotary positional embedding, half-split ("rotate-half") layout.

Per head, a vector of even dimension d_h is split into halves (x, y);
component k of the pair rotates by ``theta = pos * base ** (-2k / d_h)``.
Rotation preserves the norm of every (x_k, y_k) pair, and the dot product
of two rotated vectors depends on their positions only through the
difference p1 - p2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError
from .tensor_io import TokenTensor
from .validation import as_position_ids


@dataclass(frozen=True)
class RopeConfig:
    base: float = 10000.0
    enabled: bool = True
    layout: str = "half-split"

    def __post_init__(self):
        if not self.base > 0:
            raise ParameterError("rope base must be positive")
        if self.layout != "half-split":
            raise ParameterError(f"unsupported rope layout: {self.layout!r}")


def rotate_half_split(x: np.ndarray, pos: np.ndarray, base: float) -> np.ndarray:
    """Rotate an (n, n_h, d_h) float array; returns float64."""
    n, _, d_h = x.shape
    if d_h % 2 != 0:
        raise ValidationError("rope requires even head dim")
    half = d_h // 2
    inv_freq = base ** (-2.0 * np.arange(half) / d_h)
    theta = pos.astype(np.float64)[:, None] * inv_freq[None, :]  # (n, half)
    cos = np.cos(theta)[:, None, :]
    sin = np.sin(theta)[:, None, :]
    x1 = x[..., :half].astype(np.float64)
    x2 = x[..., half:].astype(np.float64)
    out = np.empty((n,) + x.shape[1:], dtype=np.float64)
    out[..., :half] = x1 * cos - x2 * sin
    out[..., half:] = x1 * sin + x2 * cos
    return out


def apply_rope(t: TokenTensor, pos, cfg: RopeConfig) -> TokenTensor:
    """Apply rotary embeddings to an (n, n_h, d_h) key/query tensor."""
    if not cfg.enabled:
        raise ParameterError("rope is disabled in this configuration")
    if t.data.ndim != 3:
        raise ValidationError("shape error: rope expects an (n, n_h, d_h) tensor")
    ids = as_position_ids(pos, t.n_tokens)
    return TokenTensor(t.name, rotate_half_split(t.data, ids, cfg.base))

"""Input validation helpers.

All public entry points funnel array-like inputs through these checks so
that error messages are consistent and downstream code can assume clean,
contiguous float64 working buffers.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_float_matrix(x, name: str, ndim: int) -> np.ndarray:
    """Coerce to a C-contiguous float64 array of the given rank."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValidationError(
            f"shape error: {name} must have rank {ndim}, got {arr.ndim}"
        )
    if not np.isfinite(arr).all():
        raise ValidationError(f"shape error: {name} contains non-finite values")
    return arr


def check_token_count(n: int) -> None:
    if n < 1:
        raise ValidationError("empty token set")


def check_same_tokens(n: int, m: int, a: str, b: str) -> None:
    if n != m:
        raise ValidationError(f"shape error: {a} has {n} tokens but {b} has {m}")


def as_position_ids(pos, n: int | None = None) -> np.ndarray:
    """Coerce position IDs to a non-negative int64 vector of length ``n``."""
    arr = np.asarray(pos)
    if arr.ndim != 1:
        raise ValidationError("shape error: position ids must be a 1-D array")
    if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValidationError("shape error: position ids must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ValidationError("shape error: position ids must be non-negative")
    if n is not None and arr.shape[0] != n:
        raise ValidationError(
            f"shape error: expected {n} position ids, got {arr.shape[0]}"
        )
    return arr


def flatten_heads(keys: np.ndarray) -> np.ndarray:
    """View an (n, n_h, d_h) stack as (n, n_h*d_h) per-token vectors."""
    if keys.ndim == 2:
        return keys
    if keys.ndim != 3:
        raise ValidationError("shape error: expected (n, n_h, d_h) or (n, d) array")
    return keys.reshape(keys.shape[0], -1)

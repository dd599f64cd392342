"""Pairwise distance matrices.

Cosine mode returns ``1 - cos(u, v)``, bounded to [0, 2]; Euclidean mode
returns plain L2 distances (used for 2-D illustration data). The matrix is
built from its upper triangle so it is exactly symmetric with a zero
diagonal, independent of thread count.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, ValidationError
from .parallel import map_row_blocks
from .validation import as_float_matrix

METRICS = ("cosine", "euclidean")


def check_metric(metric: str) -> str:
    if metric not in METRICS:
        raise ParameterError(f"unknown metric: {metric!r}")
    return metric


def pairwise_distance(vectors, metric: str = "cosine", threads: int = 1) -> np.ndarray:
    """Full (q, q) distance matrix over the rows of ``vectors``."""
    check_metric(metric)
    x = as_float_matrix(vectors, "vectors", 2)
    q = x.shape[0]
    dist = np.zeros((q, q), dtype=np.float64)
    if q == 0:
        return dist

    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0.0):
            raise ValidationError("undefined cosine distance: zero vector")
        unit = x / norms[:, None]

        def fill(start: int, stop: int) -> None:
            dist[start:stop] = 1.0 - unit[start:stop] @ unit.T

    else:

        def fill(start: int, stop: int) -> None:
            diff = x[start:stop, None, :] - x[None, :, :]
            dist[start:stop] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    map_row_blocks(q, fill, threads=threads)
    if metric == "cosine":
        np.clip(dist, 0.0, 2.0, out=dist)
    # rebuild from the upper triangle: exact symmetry, zero diagonal
    upper = np.triu(dist, k=1)
    return upper + upper.T


def max_pairwise_distance(vectors, metric: str = "cosine", threads: int = 1) -> float:
    """Largest pairwise distance; 0.0 when fewer than two vectors."""
    x = as_float_matrix(vectors, "vectors", 2)
    if x.shape[0] < 2:
        return 0.0
    return float(pairwise_distance(x, metric=metric, threads=threads).max())

"""Deterministic synthetic token dumps with known cluster structure.

A scene plants ``clusters`` mutually orthogonal key directions plus
``outliers`` isolated directions. Tokens of one group stay within ``noise``
cosine distance of each other, while any cross-group distance is close
to 1, so the planted partition is unambiguous for any reasonable cutoff.
Hidden-state norms ramp upward inside each planted cluster (outliers stay
at norm 1), with the ramp height set by ``norm_spread``; queries mirror the
keys so the pooled query aligns with the planted directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ValidationError


@dataclass
class SyntheticScene:
    hidden: np.ndarray  # (n, hidden_dim) float32
    keys: np.ndarray  # (n, heads, head_dim) float32
    queries: np.ndarray  # (n, heads, head_dim) float32
    position_ids: np.ndarray  # (n,) int64
    labels: np.ndarray  # (n,) int64, planted group per token
    n_clusters: int
    n_outliers: int

    @property
    def n_tokens(self) -> int:
        return self.hidden.shape[0]

    @property
    def outlier_groups(self) -> list[int]:
        return list(range(self.n_clusters, self.n_clusters + self.n_outliers))


def generate_scene(
    tokens: int,
    heads: int = 2,
    head_dim: int = 8,
    hidden_dim: int = 16,
    clusters: int = 3,
    outliers: int = 2,
    noise: float = 0.02,
    norm_spread: float = 0.0,
    seed: int = 0,
) -> SyntheticScene:
    if tokens < 1 or heads < 1 or head_dim < 1 or hidden_dim < 1:
        raise ParameterError("scene dimensions must be positive")
    if clusters < 1 or outliers < 0:
        raise ParameterError("need at least one cluster and non-negative outliers")
    if not 0.0 <= noise < 0.5:
        raise ParameterError("noise must lie in [0, 0.5)")
    if norm_spread < 0:
        raise ParameterError("norm spread must be non-negative")
    key_dim = heads * head_dim
    groups = clusters + outliers
    if groups > key_dim:
        raise ValidationError(
            f"infeasible geometry: {groups} separated directions need at least "
            f"{groups} key dimensions, got {key_dim}"
        )
    if tokens - outliers < clusters:
        raise ValidationError(
            f"infeasible geometry: {tokens} tokens cannot fill {clusters} clusters "
            f"and {outliers} outliers"
        )

    rng = np.random.default_rng(seed)
    # orthonormal group directions via QR of a Gaussian matrix
    directions, _ = np.linalg.qr(rng.standard_normal((key_dim, groups)))
    directions = directions.T  # (groups, key_dim)

    cluster_tokens = tokens - outliers
    base = cluster_tokens // clusters
    sizes = [base + (1 if g < cluster_tokens % clusters else 0) for g in range(clusters)]
    sizes += [1] * outliers

    # tokens within theta_max of their direction are pairwise within `noise`
    theta_max = np.arccos(1.0 - noise) / 2.0 if noise > 0 else 0.0

    keys = np.empty((tokens, key_dim), dtype=np.float64)
    norms = np.empty(tokens, dtype=np.float64)
    labels = np.empty(tokens, dtype=np.int64)
    t = 0
    for g, size in enumerate(sizes):
        u = directions[g]
        for r in range(size):
            theta = theta_max * (r / max(size - 1, 1))
            v = rng.standard_normal(key_dim)
            v -= (v @ u) * u
            v_norm = np.linalg.norm(v)
            v = v / v_norm if v_norm > 0 else np.zeros_like(v)
            keys[t] = np.cos(theta) * u + np.sin(theta) * v
            labels[t] = g
            if g < clusters:
                ramp = r / max(size - 1, 1)
                norms[t] = 1.0 + norm_spread * (0.5 + 0.5 * ramp)
            else:
                norms[t] = 1.0
            t += 1

    hidden_dirs = rng.standard_normal((tokens, hidden_dim))
    hidden_dirs /= np.linalg.norm(hidden_dirs, axis=1, keepdims=True)
    hidden = hidden_dirs * norms[:, None]

    keys_3d = keys.reshape(tokens, heads, head_dim)
    return SyntheticScene(
        hidden=hidden.astype(np.float32),
        keys=keys_3d.astype(np.float32),
        queries=keys_3d.astype(np.float32),
        position_ids=np.arange(tokens, dtype=np.int64),
        labels=labels,
        n_clusters=clusters,
        n_outliers=outliers,
    )


def chain_scene(points: int = 8, span: float = np.pi, heads: int = 1, head_dim: int = 2) -> SyntheticScene:
    """Unit vectors along a circular arc: consecutive points are close, the
    ends are far apart. Exercises the difference between bounded and
    unbounded clusterers."""
    if points < 2:
        raise ParameterError("a chain needs at least two points")
    if head_dim < 2:
        raise ParameterError("chain points need at least two dimensions")
    angles = np.linspace(0.0, span, points)
    key_dim = heads * head_dim
    keys = np.zeros((points, key_dim), dtype=np.float64)
    keys[:, 0] = np.cos(angles)
    keys[:, 1] = np.sin(angles)
    keys_3d = keys.reshape(points, heads, head_dim)
    return SyntheticScene(
        hidden=keys[:, :key_dim].astype(np.float32),
        keys=keys_3d.astype(np.float32),
        queries=keys_3d.astype(np.float32),
        position_ids=np.arange(points, dtype=np.int64),
        labels=np.zeros(points, dtype=np.int64),
        n_clusters=1,
        n_outliers=0,
    )

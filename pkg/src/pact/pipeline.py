"""The full token-reduction pipeline.

Stages: importance split on pre-rotary keys/queries; distance-bounded
density-peak clustering on the (post-rotary) keys of the important tokens;
recovery of pruned tokens that land strictly within ``alpha * d_c`` of a
center; per-cluster mean merging of hidden states; position IDs taken from
the cluster centers; per-cluster sizes as proportional-attention weights.

One distance matrix over all tokens is computed once and shared by the
clustering and recovery stages, so both see the same representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .clusters import ClusterSet
from .dbdpc import (
    DbdpcParams,
    assign_to_centers,
    local_density,
    select_centers_recursive,
)
from .distance import check_metric, max_pairwise_distance, pairwise_distance
from .errors import ParameterError, ValidationError
from .euti import euti_scores, split_tokens
from .rope import RopeConfig, rotate_half_split
from .tensor_io import TokenTensor
from .validation import as_float_matrix, as_position_ids, check_same_tokens, flatten_heads


@dataclass(frozen=True)
class ReductionConfig:
    d_c: float = 0.21
    lam: float = 0.55
    alpha: float = 1.5
    d_n: float = 2.0
    layer: int = 4
    rope: RopeConfig = field(default_factory=RopeConfig)
    metric: str = "cosine"
    fallback_threshold: int = 10
    position_mode: str = "center"
    threads: int = 1

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ParameterError("invalid pruning percentage")
        # alpha = 0 disables recovery entirely (ablation setting)
        if self.alpha < 0:
            raise ParameterError("tolerance coefficient must be non-negative")
        if self.position_mode not in ("center", "mean"):
            raise ParameterError(f"unknown position mode: {self.position_mode!r}")
        check_metric(self.metric)
        # delegate d_c / d_n / fallback checks
        self.dbdpc_params()

    def dbdpc_params(self) -> DbdpcParams:
        return DbdpcParams(
            d_c=self.d_c,
            d_n=self.d_n,
            metric=self.metric,
            fallback_threshold=self.fallback_threshold,
        )


@dataclass
class ReductionResult:
    merged_hidden: TokenTensor
    position_ids: np.ndarray
    weights: np.ndarray
    source_clusters: ClusterSet
    reduction_ratio: float
    scores: np.ndarray = field(repr=False, default=None)

    @property
    def n_tokens(self) -> int:
        return self.merged_hidden.shape[0]


def recover_pruned(
    unimportant,
    centers: list[int],
    dist_full: np.ndarray,
    alpha: float,
    d_c: float,
    clusters: ClusterSet,
) -> ClusterSet:
    """Re-admit pruned tokens strictly closer than ``alpha * d_c`` to a center.

    Each recovered token joins its nearest center (ties toward the
    earliest-selected one); everything else stays discarded. Centers are
    unchanged.
    """
    members = {c: list(clusters.members[c]) for c in clusters.centers}
    pruned = np.asarray(unimportant, dtype=np.int64)
    if pruned.size and centers:
        sub = dist_full[np.ix_(pruned, centers)]
        nearest = sub.argmin(axis=1)
        dist_to_nearest = sub[np.arange(pruned.size), nearest]
        for token, center_pos, d in zip(pruned, nearest, dist_to_nearest):
            if d < alpha * d_c:
                members[int(centers[center_pos])].append(int(token))
    members = {c: sorted(m) for c, m in members.items()}
    return ClusterSet(centers=list(clusters.centers), members=members, d_c=clusters.d_c)


def merge_clusters(hidden, clusters: ClusterSet, name: str = "merged_hidden") -> TokenTensor:
    """Arithmetic mean of each cluster's hidden states, in center order."""
    h = as_float_matrix(hidden, "hidden states", 2)
    out = np.empty((clusters.n_clusters, h.shape[1]), dtype=np.float64)
    for row, center in enumerate(clusters.centers):
        out[row] = h[clusters.members[center]].mean(axis=0)
    return TokenTensor(name, out)


def assign_position_ids(pos, clusters: ClusterSet, mode: str = "center") -> np.ndarray:
    """Position ID per output cluster, in center order.

    ``center`` takes the center token's original ID (the default);
    ``mean`` takes the rounded mean of the member IDs (ablation variant).
    """
    ids = as_position_ids(pos)
    if mode == "center":
        return ids[np.asarray(clusters.centers, dtype=np.int64)]
    if mode == "mean":
        out = np.empty(clusters.n_clusters, dtype=np.int64)
        for row, center in enumerate(clusters.centers):
            out[row] = int(np.floor(ids[clusters.members[center]].mean() + 0.5))
        return out
    raise ParameterError(f"unknown position mode: {mode!r}")


def pact_reduce(hidden, keys, queries, position_ids, cfg: ReductionConfig | None = None) -> ReductionResult:
    """Run the full reduction over one layer's token dump."""
    cfg = cfg or ReductionConfig()
    h = as_float_matrix(getattr(hidden, "data", hidden), "hidden states", 2)
    k = np.asarray(getattr(keys, "data", keys), dtype=np.float64)
    q = np.asarray(getattr(queries, "data", queries), dtype=np.float64)
    if k.ndim != 3 or q.ndim != 3:
        raise ValidationError("shape error: keys and queries must have shape (n, n_h, d_h)")
    n = h.shape[0]
    if n == 0:
        raise ValidationError("empty token set")
    check_same_tokens(n, k.shape[0], "hidden states", "keys")
    pos = as_position_ids(position_ids, n)

    # Stage 1: importance split (pre-rotary keys and queries)
    scores = euti_scores(h, k, q)
    split = split_tokens(scores, cfg.lam)
    if split.important.size == 0:
        raise ValidationError("empty token set")

    # Stage 2: cluster the important tokens on the clustering representation
    cluster_keys = rotate_half_split(k, pos, cfg.rope.base) if cfg.rope.enabled else k
    flat = flatten_heads(cluster_keys)
    dist_full = pairwise_distance(flat, metric=cfg.metric, threads=cfg.threads)
    imp = split.important
    dist_imp = dist_full[np.ix_(imp, imp)]
    rho = local_density(dist_imp, cfg.d_n)
    centers_sub = select_centers_recursive(dist_imp, rho, cfg.d_c, cfg.fallback_threshold)
    clusters = assign_to_centers(dist_imp, centers_sub, d_c=cfg.d_c).remapped(imp)

    # Stage 3: recover pruned tokens near centers
    clusters = recover_pruned(
        split.unimportant, clusters.centers, dist_full, cfg.alpha, cfg.d_c, clusters
    )

    # Stage 4: merge hidden states, carry center position IDs and sizes
    merged = merge_clusters(h, clusters)
    out_pos = assign_position_ids(pos, clusters, mode=cfg.position_mode)
    weights = clusters.sizes()
    return ReductionResult(
        merged_hidden=merged,
        position_ids=out_pos,
        weights=weights,
        source_clusters=clusters,
        reduction_ratio=1.0 - clusters.n_clusters / n,
        scores=scores,
    )


def layer_key_spread(keys_per_layer, threads: int = 1) -> list[float]:
    """Max pairwise cosine distance among each layer's (pre-rotary) keys."""
    if not keys_per_layer:
        raise ValidationError("empty token set")
    spreads = []
    for layer_keys in keys_per_layer:
        flat = flatten_heads(np.asarray(getattr(layer_keys, "data", layer_keys), dtype=np.float64))
        spreads.append(max_pairwise_distance(flat, metric="cosine", threads=threads))
    return spreads


def select_reduction_layer(spreads, tau: float | None = None) -> int | None:
    """Earliest layer whose key spread reaches ``tau``.

    ``tau`` defaults to 0.9 times the largest observed spread. Returns
    ``None`` when no layer qualifies.
    """
    spreads = list(spreads)
    if not spreads:
        raise ValidationError("empty token set")
    if tau is None:
        tau = 0.9 * max(spreads)
    for i, s in enumerate(spreads):
        if s >= tau:
            return i
    return None


class PactReducer(BaseEstimator):
    """Estimator-style front for :func:`pact_reduce`.

    Stateless apart from its parameters; ``reduce`` accepts plain arrays or
    :class:`TokenTensor` inputs.
    """

    def __init__(
        self,
        d_c: float = 0.21,
        lam: float = 0.55,
        alpha: float = 1.5,
        d_n: float = 2.0,
        layer: int = 4,
        rope_base: float = 10000.0,
        use_rope: bool = True,
        metric: str = "cosine",
        position_mode: str = "center",
        threads: int = 1,
    ):
        self.d_c = d_c
        self.lam = lam
        self.alpha = alpha
        self.d_n = d_n
        self.layer = layer
        self.rope_base = rope_base
        self.use_rope = use_rope
        self.metric = metric
        self.position_mode = position_mode
        self.threads = threads

    def config(self) -> ReductionConfig:
        return ReductionConfig(
            d_c=self.d_c,
            lam=self.lam,
            alpha=self.alpha,
            d_n=self.d_n,
            layer=self.layer,
            rope=RopeConfig(base=self.rope_base, enabled=self.use_rope),
            metric=self.metric,
            position_mode=self.position_mode,
            threads=self.threads,
        )

    def reduce(self, hidden, keys, queries, position_ids) -> ReductionResult:
        return pact_reduce(hidden, keys, queries, position_ids, self.config())

"""Baseline clusterers sharing the ClusterSet contract.

Classic density-peak clustering (DPC) selects centers by high density times
distance-to-denser-point and lets every other point inherit the cluster of
its nearest denser neighbor, walking from the highest density down. Unlike
the distance-bounded variant, nothing limits how far a member may drift
from its center, so the member-radius guarantee is explicitly waived here.

The k-means baseline runs Lloyd iterations with seeded index initialization
and reports, per cluster, the member closest to the cluster mean as its
representative index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .clusters import ClusterSet
from .distance import check_metric, pairwise_distance
from .errors import ParameterError, ValidationError
from .validation import as_float_matrix, flatten_heads


@dataclass(frozen=True)
class DpcParams:
    d_c: float
    threshold: float | None = None
    top_fraction: float | None = None
    density: str = "gaussian"
    metric: str = "cosine"

    def __post_init__(self):
        if not self.d_c > 0:
            raise ParameterError("cutoff distance must be positive")
        if (self.threshold is None) == (self.top_fraction is None):
            raise ParameterError("set exactly one of threshold and top_fraction")
        for value, label in ((self.threshold, "threshold"), (self.top_fraction, "top_fraction")):
            if value is not None and not 0.0 < value <= 1.0:
                raise ParameterError(f"{label} must lie in (0, 1]")
        if self.density not in ("gaussian", "cutoff-count"):
            raise ParameterError(f"unknown density mode: {self.density!r}")
        check_metric(self.metric)


def dpc_density(dist: np.ndarray, d_c: float, mode: str = "gaussian") -> np.ndarray:
    """Gaussian kernel density or neighbor count within the cutoff.

    Both modes include the self term; it shifts every density by one and
    cannot change ranks.
    """
    if mode == "gaussian":
        return np.exp(-((dist / d_c) ** 2)).sum(axis=1)
    if mode == "cutoff-count":
        return (dist < d_c).sum(axis=1).astype(np.float64)
    raise ParameterError(f"unknown density mode: {mode!r}")


def dpc_cluster(vectors, params: DpcParams, threads: int = 1) -> ClusterSet:
    """Classic density-peak clustering; member-to-center distances unbounded."""
    x = flatten_heads(np.asarray(vectors))
    x = as_float_matrix(x, "vectors", 2)
    q = x.shape[0]
    if q == 0:
        raise ValidationError("empty token set")
    dist = pairwise_distance(x, metric=params.metric, threads=threads)
    rho = dpc_density(dist, params.d_c, params.density)
    order = np.lexsort((np.arange(q), -rho))  # density desc, index asc
    position = np.empty(q, dtype=np.int64)
    position[order] = np.arange(q)

    # delta: distance to the nearest point earlier in the density order;
    # the densest point gets its farthest distance (classic convention)
    delta = np.empty(q, dtype=np.float64)
    delta[order[0]] = dist[order[0]].max() if q > 1 else 1.0
    for p in range(1, q):
        i = order[p]
        delta[i] = dist[i, order[:p]].min()

    gamma = rho * delta
    if params.threshold is not None:
        is_center = gamma >= params.threshold * gamma.max()
        if not is_center.any() or gamma.max() == 0.0:
            is_center = np.zeros(q, dtype=bool)
            is_center[order[0]] = True
    else:
        n_centers = max(1, math.ceil(params.top_fraction * q))
        by_gamma = np.lexsort((np.arange(q), -gamma))
        is_center = np.zeros(q, dtype=bool)
        is_center[by_gamma[:n_centers]] = True
    # the densest point has no denser neighbor to inherit from
    is_center[order[0]] = True

    labels = np.full(q, -1, dtype=np.int64)
    for p, i in enumerate(order):
        if is_center[i]:
            labels[i] = i
        else:
            earlier = order[:p]
            nearest = earlier[dist[i, earlier].argmin()]
            labels[i] = labels[nearest]

    centers = [int(i) for i in order if is_center[i]]
    members = {c: sorted(np.flatnonzero(labels == c).tolist()) for c in centers}
    return ClusterSet(centers=centers, members=members, d_c=params.d_c)


def representative_center(vectors, members) -> int:
    """Member index with the highest cosine similarity to the member mean."""
    x = as_float_matrix(np.asarray(vectors), "vectors", 2)
    idx = np.asarray(sorted(int(i) for i in members), dtype=np.int64)
    if idx.size == 0:
        raise ValidationError("empty token set")
    group = x[idx]
    mean = group.mean(axis=0)
    mean_norm = np.linalg.norm(mean)
    if mean_norm == 0.0:
        return int(idx[0])
    norms = np.linalg.norm(group, axis=1)
    if np.any(norms == 0.0):
        raise ValidationError("undefined cosine distance: zero vector")
    sims = (group @ mean) / (norms * mean_norm)
    return int(idx[sims.argmax()])  # argmax keeps the lowest index on ties


def kmeans_cluster(
    vectors,
    k: int,
    max_iters: int = 100,
    seed: int = 0,
    metric: str = "cosine",
) -> ClusterSet:
    """Seeded Lloyd iterations; clusters keyed by representative member.

    In cosine mode the input rows are L2-normalized and centroids are
    re-normalized means (zero-norm or emptied clusters keep their previous
    centroid). Euclidean mode runs on the raw coordinates.
    """
    check_metric(metric)
    x = flatten_heads(np.asarray(vectors))
    x = as_float_matrix(x, "vectors", 2)
    q = x.shape[0]
    if q == 0:
        raise ValidationError("empty token set")
    if not 1 <= k <= q:
        raise ParameterError(f"invalid cluster count: k={k} with {q} vectors")
    if max_iters < 1:
        raise ParameterError("max_iters must be at least 1")

    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0.0):
            raise ValidationError("undefined cosine distance: zero vector")
        x = x / norms[:, None]

    rng = np.random.default_rng(seed)
    centroids = x[np.sort(rng.choice(q, size=k, replace=False))].copy()
    owner = np.full(q, -1, dtype=np.int64)
    for _ in range(max_iters):
        if metric == "cosine":
            new_owner = (x @ centroids.T).argmax(axis=1)
        else:
            d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            new_owner = d2.argmin(axis=1)
        if np.array_equal(new_owner, owner):
            break
        owner = new_owner
        for j in range(k):
            rows = np.flatnonzero(owner == j)
            if rows.size == 0:
                continue
            mean = x[rows].mean(axis=0)
            if metric == "cosine":
                norm = np.linalg.norm(mean)
                if norm == 0.0:
                    continue
                mean = mean / norm
            centroids[j] = mean

    centers: list[int] = []
    members: dict[int, list[int]] = {}
    for j in range(k):
        rows = np.flatnonzero(owner == j)
        if rows.size == 0:
            continue
        rep = representative_center(x, rows)
        centers.append(rep)
        members[rep] = rows.tolist()
    return ClusterSet(centers=centers, members=members, d_c=None)


class DensityPeaks(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`dpc_cluster`."""

    def __init__(
        self,
        d_c: float = 0.21,
        threshold: float | None = 0.2,
        top_fraction: float | None = None,
        density: str = "gaussian",
        metric: str = "cosine",
        threads: int = 1,
    ):
        self.d_c = d_c
        self.threshold = threshold
        self.top_fraction = top_fraction
        self.density = density
        self.metric = metric
        self.threads = threads

    def fit(self, X, y=None):
        params = DpcParams(
            d_c=self.d_c,
            threshold=self.threshold,
            top_fraction=self.top_fraction,
            density=self.density,
            metric=self.metric,
        )
        cs = dpc_cluster(X, params, threads=self.threads)
        self.cluster_set_ = cs
        self.center_indices_ = np.asarray(cs.centers, dtype=np.int64)
        self.labels_ = cs.labels(np.asarray(X).shape[0])
        return self


class KMeansClusterer(ClusterMixin, BaseEstimator):
    """Estimator wrapper around :func:`kmeans_cluster`."""

    def __init__(
        self,
        n_clusters: int = 8,
        max_iters: int = 100,
        seed: int = 0,
        metric: str = "cosine",
    ):
        self.n_clusters = n_clusters
        self.max_iters = max_iters
        self.seed = seed
        self.metric = metric

    def fit(self, X, y=None):
        cs = kmeans_cluster(
            X, self.n_clusters, max_iters=self.max_iters, seed=self.seed, metric=self.metric
        )
        self.cluster_set_ = cs
        self.center_indices_ = np.asarray(cs.centers, dtype=np.int64)
        self.labels_ = cs.labels(np.asarray(X).shape[0])
        return self

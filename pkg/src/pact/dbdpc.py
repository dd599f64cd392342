"""Distance-bounded density-peak clustering.

Vectors are processed in descending order of local density
``rho_i = sum_j exp(-d_ij / d_n)`` (self term included); a vector becomes a
cluster center iff its minimum distance to every previously selected center
exceeds the cutoff ``d_c``, and every vector then joins its nearest center.
This guarantees each member lies within ``d_c`` of its center and centers
are pairwise more than ``d_c`` apart, which in cosine mode bounds any
same-cluster pair by ``2 * d_c * (2 - d_c)``.

Center selection is offered in two equivalent forms: the literal sequential
scan, and a round-based form that repeatedly takes every vector whose
distance to all denser vectors exceeds ``d_c``, discards everything within
``d_c`` of the new centers, and falls back to the sequential scan once a
round yields fewer than ``fallback_threshold`` new centers. Density ties
are broken by lower index everywhere, so both forms return the same centers
in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .clusters import ClusterSet
from .distance import check_metric, pairwise_distance
from .errors import ParameterError, ValidationError
from .validation import as_float_matrix, flatten_heads


@dataclass(frozen=True)
class DbdpcParams:
    d_c: float = 0.21
    d_n: float = 2.0
    metric: str = "cosine"
    fallback_threshold: int = 10

    def __post_init__(self):
        # d_c = 0 is the degenerate no-merge setting: every distinct vector
        # becomes its own center.
        if self.d_c < 0:
            raise ParameterError("cutoff distance must be non-negative")
        if not self.d_n > 0:
            raise ParameterError("density normalization factor must be positive")
        if self.fallback_threshold < 1:
            raise ParameterError("fallback threshold must be at least 1")
        check_metric(self.metric)


def local_density(dist: np.ndarray, d_n: float) -> np.ndarray:
    """Per-vector density ``rho_i = sum_j exp(-d_ij / d_n)``, in [1, q]."""
    if not d_n > 0:
        raise ParameterError("density normalization factor must be positive")
    return np.exp(-dist / d_n).sum(axis=1)


def _density_order(rho: np.ndarray) -> np.ndarray:
    """Indices sorted by descending density, ties by ascending index."""
    rho = np.asarray(rho, dtype=np.float64)
    if not np.isfinite(rho).all():
        raise ValidationError("shape error: densities must be finite")
    return np.lexsort((np.arange(rho.shape[0]), -rho))


def select_centers_iterative(dist: np.ndarray, rho: np.ndarray, d_c: float) -> list[int]:
    """Sequential center scan; returns centers in selection order."""
    if len(rho) == 0:
        raise ValidationError("empty token set")
    order = _density_order(rho)
    centers: list[int] = [int(order[0])]
    for idx in order[1:]:
        if dist[idx, centers].min() > d_c:
            centers.append(int(idx))
    return centers


def select_centers_recursive(
    dist: np.ndarray, rho: np.ndarray, d_c: float, fallback_threshold: int = 10
) -> list[int]:
    """Round-based center identification; same center set as the scan.

    Densities are first replaced by their rank in the (density desc, index
    asc) order, which makes them unique and reproduces the scan's
    tie-breaking exactly. The returned list is ordered by rank, i.e. in the
    order the sequential scan would have selected.
    """
    q = len(rho)
    if q == 0:
        raise ValidationError("empty token set")
    order = _density_order(rho)
    rank = np.empty(q, dtype=np.int64)
    rank[order] = np.arange(q)

    centers: list[int] = []
    active = np.ones(q, dtype=bool)
    while active.any():
        act = np.flatnonzero(active)
        sub = dist[np.ix_(act, act)]
        r = rank[act]
        # delta_i: min distance to any denser active vector; +inf for the
        # densest one, which is therefore always selected
        denser = r[None, :] < r[:, None]
        delta = np.where(denser, sub, np.inf).min(axis=1)
        new = act[delta > d_c]
        centers.extend(int(i) for i in new)
        near_new = (dist[np.ix_(act, new)] <= d_c).any(axis=1)
        active[act] = ~near_new
        if len(new) < fallback_threshold:
            remaining = act[~near_new]
            for idx in remaining[np.argsort(rank[remaining])]:
                if dist[idx, centers].min() > d_c:
                    centers.append(int(idx))
            break
    centers.sort(key=lambda i: rank[i])
    return centers


def assign_to_centers(dist: np.ndarray, centers: list[int], d_c: float | None = None) -> ClusterSet:
    """Assign every index to its nearest center (ties: earliest-selected)."""
    if not centers:
        raise ValidationError("empty token set")
    nearest = dist[:, centers].argmin(axis=1)  # argmin keeps the first tie
    members: dict[int, list[int]] = {int(c): [] for c in centers}
    for i, j in enumerate(nearest):
        members[int(centers[j])].append(i)
    return ClusterSet(centers=[int(c) for c in centers], members=members, d_c=d_c)


def dbdpc_cluster(
    vectors,
    params: DbdpcParams | None = None,
    *,
    selection: str = "recursive",
    threads: int = 1,
) -> ClusterSet:
    """Cluster per-token vectors; multi-head stacks are flattened per token."""
    params = params or DbdpcParams()
    x = flatten_heads(np.asarray(vectors))
    x = as_float_matrix(x, "vectors", 2)
    if x.shape[0] == 0:
        raise ValidationError("empty token set")
    dist = pairwise_distance(x, metric=params.metric, threads=threads)
    rho = local_density(dist, params.d_n)
    if selection == "recursive":
        centers = select_centers_recursive(dist, rho, params.d_c, params.fallback_threshold)
    elif selection == "iterative":
        centers = select_centers_iterative(dist, rho, params.d_c)
    else:
        raise ParameterError(f"unknown selection mode: {selection!r}")
    return assign_to_centers(dist, centers, d_c=params.d_c)


class DBDPC(ClusterMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`dbdpc_cluster`.

    After ``fit(X)``, ``labels_`` holds the cluster ordinal of every row,
    ``center_indices_`` the rows selected as centers (in selection order),
    and ``cluster_set_`` the full partition.
    """

    def __init__(
        self,
        d_c: float = 0.21,
        d_n: float = 2.0,
        metric: str = "cosine",
        fallback_threshold: int = 10,
        selection: str = "recursive",
        threads: int = 1,
    ):
        self.d_c = d_c
        self.d_n = d_n
        self.metric = metric
        self.fallback_threshold = fallback_threshold
        self.selection = selection
        self.threads = threads

    def fit(self, X, y=None):
        params = DbdpcParams(
            d_c=self.d_c,
            d_n=self.d_n,
            metric=self.metric,
            fallback_threshold=self.fallback_threshold,
        )
        cs = dbdpc_cluster(X, params, selection=self.selection, threads=self.threads)
        self.cluster_set_ = cs
        self.center_indices_ = np.asarray(cs.centers, dtype=np.int64)
        self.labels_ = cs.labels(np.asarray(X).shape[0])
        return self

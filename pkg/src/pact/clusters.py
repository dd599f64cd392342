"""Cluster partition container shared by all clusterers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


@dataclass
class ClusterSet:
    """A partition of token indices into clusters keyed by center index.

    ``centers`` preserves the producer's selection order; every member list
    is sorted ascending and contains its own center. The ``d_c`` field
    records the cutoff used by distance-bounded producers (``None`` for
    k-means, which has no cutoff).
    """

    centers: list[int]
    members: dict[int, list[int]] = field(repr=False)
    d_c: float | None = None

    def __post_init__(self):
        if not self.centers:
            raise ValidationError("empty token set")
        if set(self.centers) != set(self.members):
            raise ValidationError("cluster centers and member map disagree")
        seen: set[int] = set()
        for c in self.centers:
            group = self.members[c]
            if c not in group:
                raise ValidationError(f"center {c} missing from its own cluster")
            if seen.intersection(group):
                raise ValidationError("clusters overlap")
            seen.update(group)

    @property
    def n_clusters(self) -> int:
        return len(self.centers)

    @property
    def n_points(self) -> int:
        return sum(len(m) for m in self.members.values())

    def sizes(self) -> np.ndarray:
        """Member counts in center order."""
        return np.array([len(self.members[c]) for c in self.centers], dtype=np.int64)

    def covered_indices(self) -> np.ndarray:
        """Sorted union of all member indices."""
        out: list[int] = []
        for c in self.centers:
            out.extend(self.members[c])
        return np.sort(np.asarray(out, dtype=np.int64))

    def labels(self, n: int | None = None, missing: int = -1) -> np.ndarray:
        """Per-index cluster ordinal (position in ``centers``).

        Indices outside every cluster (e.g. discarded tokens) get
        ``missing``. ``n`` defaults to one past the largest member index.
        """
        if n is None:
            n = int(self.covered_indices().max()) + 1
        out = np.full(n, missing, dtype=np.int64)
        for ordinal, c in enumerate(self.centers):
            out[self.members[c]] = ordinal
        return out

    def remapped(self, index_map) -> "ClusterSet":
        """Translate all indices through ``index_map`` (array lookup)."""
        index_map = np.asarray(index_map)
        centers = [int(index_map[c]) for c in self.centers]
        members = {
            int(index_map[c]): sorted(int(index_map[i]) for i in self.members[c])
            for c in self.centers
        }
        return ClusterSet(centers=centers, members=members, d_c=self.d_c)


def max_intra_cluster_distance(clusters: ClusterSet, dist: np.ndarray) -> float:
    """Largest same-cluster pairwise distance under a precomputed matrix."""
    worst = 0.0
    for c in clusters.centers:
        group = clusters.members[c]
        if len(group) > 1:
            sub = dist[np.ix_(group, group)]
            worst = max(worst, float(sub.max()))
    return worst

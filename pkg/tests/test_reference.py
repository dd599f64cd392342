import numpy as np
import pytest

from pact import (
    DbdpcParams,
    DensityPeaks,
    DpcParams,
    KMeansClusterer,
    ParameterError,
    ValidationError,
    chain_scene,
    dbdpc_cluster,
    dpc_cluster,
    kmeans_cluster,
    max_intra_cluster_distance,
    pairwise_distance,
    representative_center,
)
from pact.validation import flatten_heads

import oracles


def two_blobs(seed=0, spread=0.1):
    rng = np.random.default_rng(seed)
    a = rng.normal([0.0, 0.0], spread, size=(10, 2))
    b = rng.normal([10.0, 10.0], spread, size=(10, 2))
    return np.vstack([a, b])


class TestDpc:
    def test_single_point(self):
        cs = dpc_cluster([[1.0, 0.0]], DpcParams(d_c=0.2, threshold=0.5))
        assert cs.centers == [0]
        assert cs.members == {0: [0]}

    def test_two_blobs_euclidean(self):
        pts = two_blobs()
        cs = dpc_cluster(pts, DpcParams(d_c=1.0, threshold=0.2, metric="euclidean"))
        assert cs.n_clusters == 2
        groups = sorted(sorted(m) for m in cs.members.values())
        assert groups == [list(range(10)), list(range(10, 20))]

    def test_chain_collapses_to_one_unbounded_cluster(self):
        scene = chain_scene(points=8)
        flat = flatten_heads(scene.keys.astype(np.float64))
        cs = dpc_cluster(flat, DpcParams(d_c=0.21, threshold=0.2))
        assert cs.n_clusters == 1
        dist = pairwise_distance(flat)
        # the two chain ends meet in one cluster even though they are
        # antipodal: far beyond the cutoff
        assert max_intra_cluster_distance(cs, dist) > 0.21
        assert max_intra_cluster_distance(cs, dist) == pytest.approx(2.0)

    def test_contrast_with_bounded_clustering(self):
        scene = chain_scene(points=8)
        flat = flatten_heads(scene.keys.astype(np.float64))
        dist = pairwise_distance(flat)
        d_c = 0.21
        bound = 2 * d_c * (2 - d_c)
        dpc = dpc_cluster(flat, DpcParams(d_c=d_c, threshold=0.2))
        dbd = dbdpc_cluster(flat, DbdpcParams(d_c=d_c))
        assert dpc.n_clusters == 1
        assert dbd.n_clusters >= 2
        assert max_intra_cluster_distance(dpc, dist) > bound
        assert max_intra_cluster_distance(dbd, dist) <= bound + 1e-9

    def test_top_fraction_variant(self):
        pts = two_blobs(seed=1)
        cs = dpc_cluster(pts, DpcParams(d_c=1.0, top_fraction=0.1, metric="euclidean"))
        assert cs.n_clusters == 2

    def test_cutoff_count_density(self):
        pts = two_blobs(seed=2)
        cs = dpc_cluster(
            pts, DpcParams(d_c=1.0, threshold=0.2, density="cutoff-count", metric="euclidean")
        )
        assert cs.n_clusters == 2

    def test_partition(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((30, 4))
        cs = dpc_cluster(x, DpcParams(d_c=0.3, threshold=0.3))
        assert np.array_equal(cs.covered_indices(), np.arange(30))

    def test_param_validation(self):
        with pytest.raises(ParameterError):
            DpcParams(d_c=0.2)  # neither rule set
        with pytest.raises(ParameterError):
            DpcParams(d_c=0.2, threshold=0.5, top_fraction=0.5)
        with pytest.raises(ParameterError):
            DpcParams(d_c=0.0, threshold=0.5)
        with pytest.raises(ParameterError):
            DpcParams(d_c=0.2, threshold=1.5)

    def test_empty_input(self):
        with pytest.raises(ValidationError, match="empty token set"):
            dpc_cluster(np.zeros((0, 3)), DpcParams(d_c=0.2, threshold=0.5))


class TestRepresentativeCenter:
    def test_singleton(self):
        assert representative_center([[1.0, 0.0], [0.0, 1.0]], [1]) == 1

    def test_symmetric_pair_takes_lower_index(self):
        assert representative_center([[1.0, 0.0], [0.0, 1.0]], [0, 1]) == 0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.standard_normal((3, 5))
            members = [0, 1, 2]
            mean = oracles.mean_rows(x.tolist(), members)
            sims = [
                sum(a * b for a, b in zip(x[i], mean))
                / (np.linalg.norm(x[i]) * np.linalg.norm(mean))
                for i in members
            ]
            want = members[int(np.argmax(sims))]
            assert representative_center(x, members) == want


class TestKMeans:
    def test_k_equals_q_gives_singletons(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((8, 4))
        cs = kmeans_cluster(x, k=8, seed=0)
        assert cs.n_clusters == 8
        assert all(len(m) == 1 for m in cs.members.values())

    def test_k_one_representative_is_nearest_global_mean(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((10, 3))
        cs = kmeans_cluster(x, k=1, seed=0)
        assert cs.n_clusters == 1
        unit = x / np.linalg.norm(x, axis=1, keepdims=True)
        assert cs.centers[0] == representative_center(unit, list(range(10)))

    def test_two_blobs_blob_consistent(self):
        # directional blobs: cosine-mode k-means must split them exactly
        rng = np.random.default_rng(7)
        a = rng.normal([5.0, 0.0, 0.0], 0.05, size=(9, 3))
        b = rng.normal([0.0, 5.0, 0.0], 0.05, size=(9, 3))
        cs = kmeans_cluster(np.vstack([a, b]), k=2, seed=3)
        groups = sorted(sorted(m) for m in cs.members.values())
        assert groups == [list(range(9)), list(range(9, 18))]

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((20, 4))
        a = kmeans_cluster(x, k=4, seed=42)
        b = kmeans_cluster(x, k=4, seed=42)
        assert a.centers == b.centers and a.members == b.members

    def test_k_out_of_range(self):
        x = np.ones((3, 2))
        for k in (0, 4):
            with pytest.raises(ParameterError, match="invalid cluster count"):
                kmeans_cluster(x, k=k)

    def test_partition(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((25, 4))
        cs = kmeans_cluster(x, k=5, seed=1)
        assert np.array_equal(cs.covered_indices(), np.arange(25))


class TestEstimators:
    def test_density_peaks_estimator(self):
        pts = two_blobs(seed=10)
        est = DensityPeaks(d_c=1.0, threshold=0.2, metric="euclidean").fit(pts)
        assert est.labels_.shape == (20,)
        assert len(set(est.labels_.tolist())) == 2

    def test_kmeans_estimator(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((12, 3))
        est = KMeansClusterer(n_clusters=3, seed=0).fit(x)
        assert est.labels_.shape == (12,)
        assert est.get_params()["n_clusters"] == 3

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from pact import (
    ClusterSet,
    DbdpcParams,
    PactReducer,
    ReductionConfig,
    RopeConfig,
    ValidationError,
    assign_position_ids,
    dbdpc_cluster,
    layer_key_spread,
    merge_clusters,
    pact_reduce,
    recover_pruned,
    select_reduction_layer,
    euti_scores,
)
from pact.rope import rotate_half_split
from pact.synth import generate_scene
from pact.validation import flatten_heads

import oracles


def scene_inputs(scene):
    return scene.hidden, scene.keys, scene.queries, scene.position_ids


NO_ROPE = RopeConfig(enabled=False)


class TestRecoverPruned:
    def setup_method(self):
        self.clusters = ClusterSet(centers=[0], members={0: [0]}, d_c=0.2)

    def dist(self, d):
        # token 1 is unimportant at distance d from the only center
        return np.array([[0.0, d], [d, 0.0]])

    def test_recovered_below_threshold(self):
        out = recover_pruned([1], [0], self.dist(0.25), alpha=1.5, d_c=0.2, clusters=self.clusters)
        assert out.members[0] == [0, 1]

    def test_alpha_zero_recovers_nothing(self):
        out = recover_pruned([1], [0], self.dist(0.0), alpha=0.0, d_c=0.2, clusters=self.clusters)
        assert out.members[0] == [0]

    def test_boundary_is_exclusive(self):
        exactly_threshold = 1.5 * 0.2  # the float product itself, not 0.3
        out = recover_pruned(
            [1], [0], self.dist(exactly_threshold), alpha=1.5, d_c=0.2, clusters=self.clusters
        )
        assert out.members[0] == [0]

    def test_tie_goes_to_earliest_center(self):
        clusters = ClusterSet(centers=[2, 0], members={2: [2], 0: [0]}, d_c=0.5)
        dist = np.array(
            [[0.0, 0.3, 0.9], [0.3, 0.0, 0.3], [0.9, 0.3, 0.0]]
        )
        out = recover_pruned([1], [2, 0], dist, alpha=1.0, d_c=0.5, clusters=clusters)
        assert out.members[2] == [1, 2]
        assert out.members[0] == [0]


class TestMergeClusters:
    def test_mean_of_two(self):
        cs = ClusterSet(centers=[0], members={0: [0, 1]}, d_c=1.0)
        merged = merge_clusters([[1.0, 1.0], [3.0, 3.0]], cs)
        np.testing.assert_allclose(merged.data, [[2.0, 2.0]])

    def test_singletons_project_rows(self):
        h = np.arange(12, dtype=np.float64).reshape(4, 3)
        cs = ClusterSet(centers=[2, 0], members={2: [2], 0: [0]}, d_c=0.1)
        merged = merge_clusters(h, cs)
        np.testing.assert_allclose(merged.data, h[[2, 0]])

    def test_matches_mean_oracle(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((10, 5))
        cs = ClusterSet(
            centers=[3, 7], members={3: [0, 1, 2, 3, 4], 7: [5, 6, 7, 8, 9]}, d_c=1.0
        )
        merged = merge_clusters(h, cs)
        for row, center in enumerate(cs.centers):
            want = oracles.mean_rows(h.tolist(), cs.members[center])
            np.testing.assert_allclose(merged.data[row], want, atol=1e-7)


class TestPositionIds:
    def test_center_mode_lookup(self):
        cs = ClusterSet(centers=[2, 0], members={2: [1, 2], 0: [0]}, d_c=1.0)
        assert assign_position_ids([10, 11, 12], cs).tolist() == [12, 10]

    def test_single_cluster(self):
        cs = ClusterSet(centers=[0], members={0: [0, 1, 2]}, d_c=1.0)
        assert assign_position_ids([10, 11, 12], cs).tolist() == [10]

    def test_mean_mode_rounds(self):
        cs = ClusterSet(centers=[2, 0], members={2: [1, 2], 0: [0]}, d_c=1.0)
        # mean(11, 12) = 11.5 rounds to 12; singleton keeps its id
        assert assign_position_ids([10, 11, 12], cs, mode="mean").tolist() == [12, 10]


class TestPactReduce:
    def test_degenerate_single_cluster(self):
        scene = generate_scene(16, clusters=2, outliers=1, seed=1)
        cfg = ReductionConfig(lam=0.0, d_c=2.0, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        assert res.n_tokens == 1
        assert res.weights.tolist() == [16]
        np.testing.assert_allclose(
            res.merged_hidden.data[0],
            np.asarray(scene.hidden, dtype=np.float64).mean(axis=0),
            rtol=1e-6,
        )
        assert res.reduction_ratio == pytest.approx(15 / 16)

    def test_degenerate_no_merging(self):
        scene = generate_scene(12, clusters=4, outliers=2, noise=0.01, seed=2)
        cfg = ReductionConfig(lam=0.0, d_c=0.0, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        assert res.n_tokens == 12
        assert res.reduction_ratio == 0.0
        assert sorted(res.position_ids.tolist()) == list(range(12))

    def test_planted_scene_recovered_exactly(self):
        scene = generate_scene(
            40, heads=2, head_dim=8, hidden_dim=16, clusters=3, outliers=2, noise=0.02, seed=0
        )
        cfg = ReductionConfig(lam=0.0, d_c=0.21, d_n=2.0, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        assert res.n_tokens == 5
        out_labels = res.source_clusters.labels(scene.n_tokens)
        assert adjusted_rand_score(scene.labels, out_labels) == 1.0

    def test_high_norm_clusters_survive_pruning(self):
        scene = generate_scene(
            40,
            heads=2,
            head_dim=8,
            hidden_dim=16,
            clusters=3,
            outliers=2,
            noise=0.02,
            norm_spread=4.0,
            seed=0,
        )
        cfg = ReductionConfig(lam=0.55, d_c=0.21, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        surviving_groups = {int(scene.labels[c]) for c in res.source_clusters.centers}
        assert surviving_groups == {0, 1, 2}

    def test_weight_accounting(self):
        scene = generate_scene(30, clusters=3, outliers=2, noise=0.05, seed=3)
        cfg = ReductionConfig(lam=0.4, d_c=0.3, alpha=1.2, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        covered = res.source_clusters.covered_indices()
        unrecovered = 30 - covered.size
        assert res.weights.sum() + unrecovered == 30
        assert res.weights.min() >= 1

    def test_recovery_monotone_in_alpha(self):
        scene = generate_scene(30, clusters=3, outliers=2, noise=0.05, seed=4)
        totals = []
        for alpha in (0.0, 0.5, 1.0, 1.5, 3.0):
            cfg = ReductionConfig(lam=0.5, d_c=0.25, alpha=alpha, rope=NO_ROPE)
            res = pact_reduce(*scene_inputs(scene), cfg)
            totals.append(int(res.weights.sum()))
        assert totals == sorted(totals)

    def test_alpha_zero_matches_no_recovery(self):
        scene = generate_scene(24, clusters=2, outliers=1, noise=0.05, seed=5)
        cfg = ReductionConfig(lam=0.5, d_c=0.25, alpha=0.0, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        split_size = res.source_clusters.covered_indices().size
        assert split_size == 24 - 12  # exactly the important tokens
        assert res.weights.sum() == 12

    def test_lambda_zero_equals_plain_clustering(self):
        scene = generate_scene(20, clusters=3, outliers=1, noise=0.04, seed=6)
        cfg = ReductionConfig(lam=0.0, d_c=0.21, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        flat = flatten_heads(np.asarray(scene.keys, dtype=np.float64))
        cs = dbdpc_cluster(flat, DbdpcParams(d_c=0.21))
        assert res.source_clusters.centers == cs.centers
        assert res.source_clusters.members == cs.members
        merged = merge_clusters(np.asarray(scene.hidden, dtype=np.float64), cs)
        assert res.merged_hidden.data.tobytes() == merged.data.tobytes()

    def test_position_ids_strictly_increasing_after_sort(self):
        scene = generate_scene(25, clusters=3, outliers=2, noise=0.03, seed=7)
        cfg = ReductionConfig(lam=0.3, rope=NO_ROPE)
        res = pact_reduce(*scene_inputs(scene), cfg)
        out = np.sort(res.position_ids)
        assert np.all(np.diff(out) > 0)
        assert set(out.tolist()) <= set(scene.position_ids.tolist())

    def test_thread_count_does_not_change_result(self):
        scene = generate_scene(150, clusters=4, outliers=3, noise=0.03, seed=8)
        results = []
        for threads in (1, 4):
            cfg = ReductionConfig(lam=0.4, rope=NO_ROPE, threads=threads)
            results.append(pact_reduce(*scene_inputs(scene), cfg))
        a, b = results
        assert a.merged_hidden.data.tobytes() == b.merged_hidden.data.tobytes()
        assert a.position_ids.tolist() == b.position_ids.tolist()
        assert a.weights.tolist() == b.weights.tolist()

    def test_importance_uses_pre_rotary_inputs(self):
        scene = generate_scene(18, clusters=2, outliers=1, noise=0.03, seed=9)
        res = pact_reduce(*scene_inputs(scene), ReductionConfig(lam=0.5, rope=NO_ROPE))
        res_rope = pact_reduce(*scene_inputs(scene), ReductionConfig(lam=0.5))
        expected = euti_scores(scene.hidden, scene.keys, scene.queries)
        np.testing.assert_array_equal(res.scores, expected)
        np.testing.assert_array_equal(res_rope.scores, expected)

    def test_clustering_uses_post_rotary_keys(self):
        # plant clusters in the *post-rotation* representation: feeding the
        # pipeline inverse-rotated keys must recover them exactly
        scene = generate_scene(
            40, heads=2, head_dim=8, hidden_dim=16, clusters=3, outliers=2, noise=0.02, seed=10
        )
        pre_rope = rotate_half_split(
            np.asarray(scene.keys, dtype=np.float64), -scene.position_ids, 10000.0
        ).astype(np.float32)
        cfg = ReductionConfig(lam=0.0, d_c=0.21)
        res = pact_reduce(scene.hidden, pre_rope, scene.queries, scene.position_ids, cfg)
        assert res.n_tokens == 5
        out_labels = res.source_clusters.labels(scene.n_tokens)
        assert adjusted_rand_score(scene.labels, out_labels) == 1.0

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError, match="empty token set"):
            pact_reduce(
                np.zeros((0, 4)), np.zeros((0, 1, 2)), np.zeros((0, 1, 2)), [],
                ReductionConfig(),
            )

    def test_lambda_one_propagates_empty_token_set(self):
        scene = generate_scene(10, clusters=2, outliers=0, seed=11)
        with pytest.raises(ValidationError, match="empty token set"):
            pact_reduce(*scene_inputs(scene), ReductionConfig(lam=1.0, rope=NO_ROPE))

    def test_reducer_estimator_front(self):
        scene = generate_scene(20, clusters=2, outliers=1, noise=0.03, seed=12)
        reducer = PactReducer(lam=0.0, d_c=0.21, use_rope=False)
        res = reducer.reduce(*scene_inputs(scene))
        direct = pact_reduce(*scene_inputs(scene), reducer.config())
        assert res.merged_hidden.data.tobytes() == direct.merged_hidden.data.tobytes()
        assert reducer.get_params()["d_c"] == 0.21


class TestLayerSpread:
    def test_identical_keys_zero_spread(self):
        keys = np.ones((6, 1, 4), dtype=np.float64)
        assert layer_key_spread([keys]) == [0.0]

    def test_orthogonal_keys_spread_at_least_one(self):
        keys = np.eye(4, dtype=np.float64).reshape(4, 1, 4)
        (spread,) = layer_key_spread([keys])
        assert spread >= 1.0

    def test_earliest_layer_meeting_tau(self):
        # three synthetic layers with spreads about (0.1, 0.3, 0.8)
        layers = []
        for angle in (0.455, 0.795, 1.369):  # arccos(1 - spread)
            keys = np.zeros((2, 1, 2))
            keys[0, 0] = [1.0, 0.0]
            keys[1, 0] = [np.cos(angle), np.sin(angle)]
            layers.append(keys)
        spreads = layer_key_spread(layers)
        np.testing.assert_allclose(spreads, [0.1, 0.3, 0.8], atol=5e-3)
        assert select_reduction_layer(spreads, tau=0.5) == 2
        assert select_reduction_layer(spreads, tau=0.0) == 0
        assert select_reduction_layer(spreads, tau=0.9) is None

    def test_default_tau_is_relative(self):
        assert select_reduction_layer([0.2, 0.75, 0.8]) == 1

    def test_no_layers_rejected(self):
        with pytest.raises(ValidationError):
            layer_key_spread([])

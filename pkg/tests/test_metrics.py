import numpy as np
import pytest

from cfknn.datasets import GroundTruth
from cfknn.graph import Explanation
from cfknn.metrics import (MetricsReport, assign_clusters, hit_at_k,
                           homogeneity_after_perturb, kmeans, kmeans_pp_init,
                           pn_hit_at_k, precision_recall, sensitivity_sweep,
                           split_edges, validity)
from cfknn.sage import forward, init_model
from conftest import HOUSE_EDGES, make_graph


def gt_for(target, edges):
    nodes = frozenset({target} | {n for e in edges for n in e})
    return GroundTruth(motif_edges={target: frozenset(edges)},
                       motif_nodes={target: nodes})


class TestPrecisionRecall:
    def test_perfect_overlap(self):
        gt = gt_for(0, [(0, 1), (1, 2)])
        e = Explanation(0, frozenset({0, 1, 2}), frozenset({(0, 1), (1, 2)}))
        assert precision_recall(e, gt) == (1.0, 1.0)

    def test_partial_overlap(self):
        gt = gt_for(0, [(0, 1), (1, 2), (2, 3), (0, 3)])
        e = Explanation(0, frozenset({0, 1, 4}), frozenset({(0, 1), (0, 4)}))
        p, r = precision_recall(e, gt)
        assert p == 0.5
        assert r == 0.25

    def test_empty_explanation(self):
        gt = gt_for(0, [(0, 1)])
        e = Explanation(0, frozenset({0}), frozenset())
        assert precision_recall(e, gt) == (0.0, 0.0)

    def test_target_without_ground_truth(self):
        gt = GroundTruth()
        e = Explanation(0, frozenset({0, 1}), frozenset({(0, 1)}))
        assert precision_recall(e, gt) == (0.0, 0.0)


class TestValidity:
    def test_examples(self):
        assert validity([1.0, 1.0, 0.5]) == pytest.approx(2 / 3)
        assert validity([1.0]) == 1.0
        assert validity([0.0, 0.2]) == 0.0
        assert validity([]) == 0.0

    def test_near_one_does_not_count(self):
        assert validity([0.999999]) == 0.0


class TestSplit:
    def test_fraction_and_disjoint(self):
        g = make_graph(20, [(i, j) for i in range(20) for j in range(i + 1, 20)
                            if (i + j) % 3 == 0], seed=0)
        train, test = split_edges(g, 0.1, seed=1)
        assert len(test) == round(0.1 * g.num_edges)
        assert test <= g.edges
        assert not (train.edges & test)
        assert len(train.edges) + len(test) == g.num_edges

    def test_deterministic(self, house):
        _, t1 = split_edges(house, 0.4, seed=3)
        _, t2 = split_edges(house, 0.4, seed=3)
        assert t1 == t2


class TestPn:
    def setup_instance(self):
        g = make_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5),
                           (0, 2)], seed=4)
        model = init_model(4, 4, 1, seed=4)
        return model, g

    def test_no_test_partners(self):
        model, g = self.setup_instance()
        e = Explanation(0, frozenset({0, 1}), frozenset({(0, 1)}))
        assert pn_hit_at_k(model, g, [e], frozenset(), k=2) == 0.0

    def test_fraction_in_range(self):
        model, g = self.setup_instance()
        train, test = split_edges(g, 0.3, seed=0)
        expls = [Explanation(v, frozenset({v} | set(train.neighbors(v)[:1])),
                             frozenset({tuple(sorted((v, train.neighbors(v)[0])))}))
                 for v in range(6) if train.neighbors(v)]
        val = pn_hit_at_k(model, train, expls, test, k=2)
        assert 0.0 <= val <= 1.0

    def test_hit_at_k_trivial(self):
        emb = np.array([[0.0], [0.1], [5.0], [5.1]])
        # partners 0-1 and 2-3 are each other's nearest neighbor
        assert hit_at_k(emb, [(0, 1), (2, 3)], k=1) == 1.0
        # 0-2 are far apart; with k=1 neither sees the other
        assert hit_at_k(emb, [(0, 2)], k=1) == 0.0
        assert hit_at_k(emb, [], k=1) == 0.0


def lloyd_reference(x, centroids, max_iters=300):
    """Independent Lloyd loop used to cross-check the packaged k-means."""
    assign = np.argmin(((x[:, None] - centroids[None]) ** 2).sum(-1), axis=1)
    for _ in range(max_iters):
        new = centroids.copy()
        for c in range(centroids.shape[0]):
            m = assign == c
            if m.any():
                new[c] = x[m].mean(axis=0)
        nxt = np.argmin(((x[:, None] - new[None]) ** 2).sum(-1), axis=1)
        if np.array_equal(nxt, assign):
            return nxt, new
        centroids, assign = new, nxt
    return assign, centroids


class TestKmeans:
    def fixture_points(self):
        rng = np.random.default_rng(0)
        return np.vstack([rng.normal(0, 0.3, (25, 2)),
                          rng.normal(5, 0.3, (25, 2))])

    def test_agrees_with_independent_lloyd(self):
        x = self.fixture_points()
        assign, centroids = kmeans(x, 2, seed=0)
        init = kmeans_pp_init(x, 2, np.random.default_rng(0))
        ref_assign, ref_centroids = lloyd_reference(x, init)
        agreement = np.mean(assign == ref_assign)
        assert agreement == 1.0
        assert np.allclose(sorted(centroids.tolist()),
                           sorted(ref_centroids.tolist()))

    def test_separated_blobs_recovered(self):
        x = self.fixture_points()
        assign, _ = kmeans(x, 2, seed=1)
        assert len(set(assign[:25])) == 1
        assert len(set(assign[25:])) == 1
        assert assign[0] != assign[-1]

    def test_deterministic(self):
        x = self.fixture_points()
        a1, c1 = kmeans(x, 3, seed=5)
        a2, c2 = kmeans(x, 3, seed=5)
        assert np.array_equal(a1, a2)
        assert np.array_equal(c1, c2)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            kmeans(np.zeros((5, 2)), 0)

    def test_assign_clusters(self):
        x = np.array([[0.0], [1.0], [9.0]])
        c = np.array([[0.5], [9.0]])
        assert assign_clusters(x, c).tolist() == [0, 0, 1]


class TestHomogeneity:
    def test_in_range_and_empty_expl_is_baseline(self):
        g = make_graph(5, HOUSE_EDGES, seed=1)
        model = init_model(4, 4, 1, seed=1)
        e = Explanation(0, frozenset({0, 1}), frozenset({(0, 1)}))
        h = homogeneity_after_perturb(model, g, e, 0, n_clusters=2, k=3)
        assert 0.0 <= h <= 1.0
        empty = Explanation(0, frozenset({0}), frozenset())
        h0 = homogeneity_after_perturb(model, g, empty, 0, n_clusters=2, k=3)
        base = forward(model, g).matrix
        _, centroids = kmeans(base, 2, seed=0)
        assign = assign_clusters(base, centroids)
        from cfknn.knn import knn
        expected = np.mean([assign[u] == assign[0]
                            for u in knn(base, 0, 3).neighbors])
        assert h0 == pytest.approx(expected)


class TestReport:
    def test_aggregates_by_method(self):
        rep = MetricsReport(per_node=[
            {"target": 0, "method": "a", "importance": 1.0, "size": 2},
            {"target": 1, "method": "a", "importance": 0.5, "size": 4},
            {"target": 0, "method": "b", "importance": 1.0, "size": 1},
        ])
        agg = rep.aggregates()
        assert agg["a"]["n_targets"] == 2
        assert agg["a"]["mean_importance"] == pytest.approx(0.75)
        assert agg["a"]["mean_size"] == pytest.approx(3.0)
        assert agg["a"]["validity"] == pytest.approx(0.5)
        assert agg["b"]["validity"] == 1.0

    def test_empty(self):
        assert MetricsReport().aggregates() == {}


class TestSweep:
    def test_curve_shape_and_axis_validation(self):
        g = make_graph(5, HOUSE_EDGES, seed=2)
        model = init_model(4, 4, 1, seed=2)
        from cfknn.mcts import ExplainerConfig
        base = ExplainerConfig(k=2, max_iters=15)
        curve = sensitivity_sweep(model, g, [0, 4], "p_restart",
                                  [0.0, 0.5], base, seed=0)
        assert [v for v, _ in curve] == [0.0, 0.5]
        assert all(0.0 <= m <= 1.0 for _, m in curve)
        with pytest.raises(ValueError):
            sensitivity_sweep(model, g, [0], "gamma", [1], base)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cfknn.graph import Explanation
from cfknn.knn import (ImportanceEvaluator, LshIndex, importance, knn,
                       knn_set, lsh_recall)
from cfknn.sage import forward, init_model
from conftest import make_graph


class TestKnn:
    def test_line_points(self):
        mat = np.array([[0.0], [1.0], [3.0], [6.0], [10.0]])
        r = knn(mat, 0, 2)
        assert r.neighbors == [1, 2]
        assert r.distances == pytest.approx([1.0, 3.0])

    def test_excludes_self(self):
        mat = np.zeros((4, 2))
        assert 1 not in knn(mat, 1, 3).neighbors

    def test_tie_breaks_to_smaller_id(self):
        mat = np.array([[0.0], [2.0], [-2.0], [2.0]])
        r = knn(mat, 0, 2)
        # nodes 1, 2, 3 all at distance 2; smaller ids win
        assert r.neighbors == [1, 2]

    def test_k_clamped_with_warning(self):
        mat = np.random.default_rng(0).standard_normal((4, 2))
        with pytest.warns(UserWarning, match="clamping"):
            r = knn(mat, 0, 10)
        assert len(r.neighbors) == 3

    def test_bad_args(self):
        mat = np.zeros((3, 2))
        with pytest.raises(ValueError):
            knn(mat, 5, 1)
        with pytest.raises(ValueError):
            knn(mat, 0, 0)

    @settings(max_examples=40, deadline=None)
    @given(mat=hnp.arrays(np.float64, st.tuples(st.integers(3, 12), st.just(3)),
                          elements=st.floats(-5, 5)),
           k=st.integers(1, 4))
    def test_matches_bruteforce_sort(self, mat, k):
        r = knn(mat, 0, k)
        d = np.linalg.norm(mat - mat[0], axis=1)
        expected = sorted(range(1, mat.shape[0]), key=lambda i: (d[i], i))[:k]
        assert r.neighbors == expected


class TestImportance:
    def fixture_graph(self):
        g = make_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], seed=3)
        model = init_model(4, 4, 1, seed=5)
        return g, model

    def test_empty_edges_zero(self):
        g, model = self.fixture_graph()
        expl = Explanation(0, frozenset({0}), frozenset())
        assert importance(model, g, expl, 0, 2) == 0.0

    def test_range_and_quantization(self):
        g, model = self.fixture_graph()
        for e in sorted(g.edges):
            expl = Explanation(e[0], frozenset(e), frozenset({e}))
            for k in (1, 2, 3):
                val = importance(model, g, expl, e[0], k)
                assert 0.0 <= val <= 1.0
                assert round(val * k) == pytest.approx(val * k)

    def test_stale_edge_rejected(self):
        g, model = self.fixture_graph()
        expl = Explanation(0, frozenset({0, 2}), frozenset({(0, 2)}))
        with pytest.raises(ValueError, match="absent"):
            importance(model, g, expl, 0, 2)

    def test_manual_set_difference(self):
        g, model = self.fixture_graph()
        expl = Explanation(0, frozenset({0, 1}), frozenset({(0, 1)}))
        k = 2
        before = knn_set(forward(model, g).matrix, 0, k)
        from cfknn.graph import perturb
        after = knn_set(forward(model, perturb(g, expl)).matrix, 0, k)
        assert importance(model, g, expl, 0, k) == len(before - after) / k


class TestEvaluator:
    def test_agrees_with_oneshot(self):
        g = make_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)],
                       seed=1)
        model = init_model(4, 4, 1, seed=2)
        ev = ImportanceEvaluator(model, g, 0, 3)
        for e in sorted(g.edges):
            expl = Explanation(0, frozenset({0}) | frozenset(e),
                               frozenset({e}))
            assert ev.importance_of_edges(frozenset({e})) == \
                importance(model, g, expl, 0, 3)

    def test_caching_counts_unique_sets(self):
        g = make_graph(4, [(0, 1), (1, 2), (2, 3)], seed=0)
        model = init_model(4, 4, 1, seed=0)
        ev = ImportanceEvaluator(model, g, 0, 2)
        s = frozenset({(0, 1)})
        ev.importance_of_edges(s)
        ev.importance_of_edges(s)
        ev.importance_of_edges(frozenset({(1, 2)}))
        assert ev.evals == 2

    def test_empty_set_zero(self):
        g = make_graph(3, [(0, 1), (1, 2)], seed=0)
        model = init_model(4, 4, 1, seed=0)
        ev = ImportanceEvaluator(model, g, 0, 2)
        assert ev.importance_of_edges(frozenset()) == 0.0
        assert ev.evals == 0


class TestLsh:
    def test_exact_mode_matches_knn(self):
        rng = np.random.default_rng(0)
        mat = rng.standard_normal((50, 8))
        index = LshIndex(mat, n_tables=1, n_bits=0)
        for v in range(0, 50, 7):
            assert index.query(v, 5).neighbors == knn(mat, v, 5).neighbors

    def test_recall_on_gaussian_cloud(self):
        rng = np.random.default_rng(1)
        mat = rng.standard_normal((1000, 16))
        rec = lsh_recall(mat, range(0, 1000, 10), k=5, seed=0)
        assert rec >= 0.9

    def test_widens_when_buckets_sparse(self):
        rng = np.random.default_rng(2)
        mat = rng.standard_normal((30, 4))
        index = LshIndex(mat, n_tables=1, n_bits=16, seed=0)
        r = index.query(0, 5)
        assert len(r.neighbors) == 5

    def test_bad_args(self):
        with pytest.raises(ValueError):
            LshIndex(np.zeros((3, 2)), n_tables=0)
        with pytest.raises(ValueError):
            LshIndex(np.zeros((3, 2)), n_bits=-1)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(3)
        mat = rng.standard_normal((100, 8))
        a = LshIndex(mat, seed=4).query(0, 5).neighbors
        b = LshIndex(mat, seed=4).query(0, 5).neighbors
        assert a == b

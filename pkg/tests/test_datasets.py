import numpy as np
import pytest

from cfknn.datasets import (CYCLE6, GRID3, HOUSE, GroundTruth,
                            gen_ba_shapes, gen_tree_cycles, gen_tree_grid,
                            load_citation, load_ground_truth,
                            save_ground_truth)
from cfknn.graph import GraphError, canonical


class TestBaShapes:
    def test_size(self):
        g, gt = gen_ba_shapes(0)
        assert g.num_nodes == 700  # 300 base + 80 houses of 5
        assert abs(g.num_edges - 2055) <= 0.1 * 2055
        assert len(gt.motif_targets()) == 400

    def test_motifs_are_houses(self):
        g, gt = gen_ba_shapes(0)
        for v in gt.motif_targets()[:10]:
            assert len(gt.motif_edges[v]) == 6
            assert len(gt.motif_nodes[v]) == 5
            assert gt.motif_edges[v] <= g.edges

    def test_motif_nodes_disjoint_from_base(self):
        g, gt = gen_ba_shapes(3)
        assert min(gt.motif_targets()) == 300
        # every motif node carries a nonzero label, base nodes label 0
        labels = np.asarray(g.labels)
        assert (labels[:300] == 0).all()
        assert (labels[300:] > 0).all()

    def test_determinism(self):
        g1, gt1 = gen_ba_shapes(5)
        g2, gt2 = gen_ba_shapes(5)
        assert g1.edges == g2.edges
        assert g1.features.tobytes() == g2.features.tobytes()
        assert gt1.motif_edges == gt2.motif_edges

    def test_seed_changes_graph(self):
        g1, _ = gen_ba_shapes(1)
        g2, _ = gen_ba_shapes(2)
        assert g1.edges != g2.edges

    def test_connected_to_base(self):
        g, gt = gen_ba_shapes(0)
        # each house has exactly one bridge edge leaving the motif
        for v in gt.motif_targets()[:5]:
            nodes = gt.motif_nodes[v]
            bridges = [e for e in g.edges
                       if len(nodes & set(e)) == 1]
            assert len(bridges) >= 1

    def test_bad_args(self):
        with pytest.raises(GraphError):
            gen_ba_shapes(0, base_nodes=2)


class TestTreeBenchmarks:
    def test_tree_cycles_size(self):
        g, gt = gen_tree_cycles(0)
        assert g.num_nodes == 871  # 511 tree + 60 cycles of 6
        assert abs(g.num_edges - 971) <= 0.1 * 971
        assert len(gt.motif_targets()) == 360
        assert all(len(gt.motif_edges[v]) == 6 for v in gt.motif_targets())

    def test_tree_grid_size(self):
        g, gt = gen_tree_grid(0)
        assert g.num_nodes == 1231  # 511 tree + 80 grids of 9
        assert abs(g.num_edges - 1565) <= 0.1 * 1565
        assert len(gt.motif_targets()) == 720
        assert all(len(gt.motif_edges[v]) == 12 for v in gt.motif_targets())

    def test_grid_template_shape(self):
        assert len(GRID3) == 12
        assert len(CYCLE6) == 6
        assert len(HOUSE) == 6
        deg = {}
        for u, v in GRID3:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        # 3x3 grid degrees: 4 corners of 2, 4 sides of 3, 1 center of 4
        assert sorted(deg.values()) == [2, 2, 2, 2, 3, 3, 3, 3, 4]


class TestFeatureNoise:
    def test_zero_noise_gives_constant_features(self):
        g, _ = gen_ba_shapes(0, feature_noise=0.0)
        assert np.array_equal(g.features, np.ones_like(g.features))

    def test_default_noise_is_small(self):
        g, _ = gen_ba_shapes(0)
        dev = np.abs(g.features - 1.0)
        assert dev.max() < 1.0
        assert dev.mean() == pytest.approx(0.1 * np.sqrt(2 / np.pi), rel=0.1)


class TestGroundTruthIO:
    def test_round_trip(self, tmp_path):
        _, gt = gen_tree_cycles(0, n_motifs=4)
        p = tmp_path / "gt.txt"
        save_ground_truth(gt, p)
        gt2 = load_ground_truth(p)
        assert gt2.motif_edges == gt.motif_edges
        assert gt2.motif_nodes == gt.motif_nodes

    def test_in_motif(self):
        gt = GroundTruth(motif_edges={3: frozenset({(3, 4)})},
                         motif_nodes={3: frozenset({3, 4})})
        assert gt.in_motif(3)
        assert not gt.in_motif(4)

    def test_bad_line(self, tmp_path):
        p = tmp_path / "gt.txt"
        p.write_text("3: 3 4\nnot a line\n")
        with pytest.raises(GraphError, match=":2:"):
            load_ground_truth(p)


class TestCitationLoader:
    def test_integer_ids(self, tmp_path):
        p = tmp_path / "edges.txt"
        p.write_text("# comment\n0 1\n1 2\n")
        g = load_citation(p)
        assert g.num_nodes == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_string_ids_densified(self, tmp_path):
        p = tmp_path / "edges.txt"
        p.write_text("paperA paperB\npaperB paperC\n")
        g = load_citation(p)
        assert g.num_nodes == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_features_and_labels(self, tmp_path):
        e = tmp_path / "edges.txt"
        e.write_text("0 1\n")
        f = tmp_path / "features.csv"
        f.write_text("1.0,2.0\n3.0,4.0\n")
        lab = tmp_path / "labels.csv"
        lab.write_text("0,5\n1,7\n")
        g = load_citation(e, f, lab)
        assert g.features.shape == (2, 2)
        assert list(g.labels) == [5, 7]

    def test_feature_row_shortfall(self, tmp_path):
        e = tmp_path / "edges.txt"
        e.write_text("0 4\n")
        f = tmp_path / "features.csv"
        f.write_text("1.0\n2.0\n")
        with pytest.raises(GraphError, match="feature rows"):
            load_citation(e, f)

    def test_bad_edge_line(self, tmp_path):
        p = tmp_path / "edges.txt"
        p.write_text("0\n")
        with pytest.raises(GraphError, match="expected"):
            load_citation(p)

"""Deterministic motif-benchmark generators and citation-network loading.

Three synthetic benchmarks plant node-disjoint motifs (houses, 6-cycles,
3x3 grids) on a base graph; the planted motif edges are the ground-truth
explanation for every motif node.
"""

from __future__ import annotations

import csv as csv_mod
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .graph import Edge, Graph, GraphError, canonical


@dataclass
class GroundTruth:
    motif_edges: dict[int, frozenset[Edge]] = field(default_factory=dict)
    motif_nodes: dict[int, frozenset[int]] = field(default_factory=dict)

    def in_motif(self, v: int) -> bool:
        return v in self.motif_nodes

    def motif_targets(self) -> list[int]:
        return sorted(self.motif_nodes)


def _features(n, dim, noise, rng):
    # All-ones features are invisible to a mean aggregator (every node sees the
    # same aggregate), so a small seeded jitter is added by default to let
    # structure reach the embedding. noise=0 restores exact constant features.
    x = np.ones((n, dim), dtype=np.float64)
    if noise > 0:
        x += noise * rng.standard_normal((n, dim))
    return x


def _attach_motifs(base_edges, base_n, n_motifs, motif_template, motif_labels,
                   rng):
    """Plant node-disjoint motif copies, each bridged to a random base node."""
    edges = list(base_edges)
    labels = [0] * base_n
    gt = GroundTruth()
    motif_size = max(max(e) for e in motif_template) + 1 if motif_template else 0
    next_id = base_n
    for _ in range(n_motifs):
        ids = list(range(next_id, next_id + motif_size))
        next_id += motif_size
        motif = frozenset(canonical(ids[a], ids[b]) for a, b in motif_template)
        edges.extend(motif)
        anchor = int(rng.integers(0, base_n))
        edges.append(canonical(ids[0], anchor))
        for local, node in enumerate(ids):
            gt.motif_edges[node] = motif
            gt.motif_nodes[node] = frozenset(ids)
            labels.append(motif_labels[local])
    return edges, labels, gt, next_id


# 5-node house: square 0-1-2-3 plus roof node 4 on top of 0 and 1.
HOUSE = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4)]
HOUSE_LABELS = [2, 2, 3, 3, 1]  # 1 roof, 2 middle, 3 bottom

CYCLE6 = [(i, (i + 1) % 6) for i in range(6)]

GRID3 = (
    [(3 * r + c, 3 * r + c + 1) for r in range(3) for c in range(2)]
    + [(3 * r + c, 3 * (r + 1) + c) for r in range(2) for c in range(3)]
)


def gen_ba_shapes(seed: int, base_nodes: int = 300, n_motifs: int = 80,
                  extra_edge_fraction: float = 0.1, ba_m: int = 5,
                  feature_dim: int = 10, feature_noise: float = 0.1):
    """Barabasi-Albert base graph plus house motifs and random noise edges."""
    if base_nodes < 5:
        raise GraphError("base_nodes must be >= 5")
    rng = np.random.default_rng(seed)
    base = nx.barabasi_albert_graph(base_nodes, ba_m, seed=int(seed))
    edges, labels, gt, n = _attach_motifs(
        base.edges(), base_nodes, n_motifs, HOUSE, HOUSE_LABELS, rng)
    edge_set = {canonical(u, v) for u, v in edges}
    n_extra = int(extra_edge_fraction * n)
    while n_extra > 0:
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        e = canonical(int(u), int(v))
        if e in edge_set:
            continue
        edge_set.add(e)
        edges.append(e)
        n_extra -= 1
    g = Graph.build(n, edges, features=_features(n, feature_dim, feature_noise, rng),
                    labels=labels)
    return g, gt


def _tree_base(depth: int):
    if depth < 1:
        raise GraphError("depth must be >= 1")
    tree = nx.balanced_tree(2, depth)
    return list(tree.edges()), tree.number_of_nodes()


def gen_tree_cycles(seed: int, depth: int = 8, n_motifs: int = 60,
                    feature_dim: int = 10, feature_noise: float = 0.1):
    """Balanced binary tree plus 6-node cycle motifs."""
    rng = np.random.default_rng(seed)
    base_edges, base_n = _tree_base(depth)
    edges, labels, gt, n = _attach_motifs(
        base_edges, base_n, n_motifs, CYCLE6, [1] * 6, rng)
    g = Graph.build(n, edges, features=_features(n, feature_dim, feature_noise, rng),
                    labels=labels)
    return g, gt


def gen_tree_grid(seed: int, depth: int = 8, n_motifs: int = 80,
                  feature_dim: int = 10, feature_noise: float = 0.1):
    """Balanced binary tree plus 3x3 grid motifs (9 nodes, 12 edges)."""
    rng = np.random.default_rng(seed)
    base_edges, base_n = _tree_base(depth)
    edges, labels, gt, n = _attach_motifs(
        base_edges, base_n, n_motifs, GRID3, [1] * 9, rng)
    g = Graph.build(n, edges, features=_features(n, feature_dim, feature_noise, rng),
                    labels=labels)
    return g, gt


GENERATORS = {
    "ba-shapes": gen_ba_shapes,
    "tree-cycles": gen_tree_cycles,
    "tree-grid": gen_tree_grid,
}


def save_ground_truth(gt: GroundTruth, path) -> None:
    with open(path, "w") as f:
        for node in sorted(gt.motif_edges):
            pairs = "; ".join(f"{u} {v}" for u, v in sorted(gt.motif_edges[node]))
            f.write(f"{node}: {pairs}\n")


def load_ground_truth(path) -> GroundTruth:
    gt = GroundTruth()
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                head, rest = line.split(":", 1)
                node = int(head)
                edges = frozenset(
                    canonical(*map(int, pair.split()))
                    for pair in rest.split(";") if pair.strip())
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: bad ground-truth line") from exc
            gt.motif_edges[node] = edges
            nodes = {node}
            for u, v in edges:
                nodes.update((u, v))
            gt.motif_nodes[node] = frozenset(nodes)
    return gt


def _read_csv_matrix(path):
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(csv_mod.reader(f), 1):
            if not line:
                continue
            try:
                rows.append([float(x) for x in line])
            except ValueError:
                if lineno == 1:  # header
                    continue
                raise GraphError(f"{path}:{lineno}: unparseable row")
    return np.array(rows, dtype=np.float64)


def load_citation(edge_path, feature_path=None, label_path=None) -> Graph:
    """Load a citation network from edge-list + feature/label CSV files.

    Node ids are densified through a first-appearance dictionary when they are
    not already 0..N-1 integers.
    """
    raw_edges = []
    ids: dict[str, int] = {}
    with open(edge_path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphError(f"{edge_path}:{lineno}: expected 'u v'")
            raw_edges.append((parts[0], parts[1]))
            for tok in parts[:2]:
                ids.setdefault(tok, len(ids))

    def dense(tok):
        try:
            return int(tok)
        except ValueError:
            return ids[tok]

    all_int = all(t.lstrip("-").isdigit() for e in raw_edges for t in e)
    if all_int:
        edges = [(int(u), int(v)) for u, v in raw_edges]
        n = max(max(e) for e in edges) + 1 if edges else 0
    else:
        edges = [(ids[u], ids[v]) for u, v in raw_edges]
        n = len(ids)

    features = labels = None
    if feature_path is not None:
        features = _read_csv_matrix(feature_path)
        if features.shape[0] < n:
            raise GraphError(
                f"feature rows ({features.shape[0]}) < node count ({n})")
        n = features.shape[0]
    if label_path is not None:
        labels = np.zeros(n, dtype=np.int64)
        with open(label_path) as f:
            for lineno, row in enumerate(csv_mod.reader(f), 1):
                if not row:
                    continue
                try:
                    labels[dense(row[0])] = int(row[1])
                except (ValueError, IndexError, KeyError):
                    if lineno == 1:
                        continue
                    raise GraphError(f"{label_path}:{lineno}: bad label row")
    return Graph.build(n, edges, features=features, labels=labels)

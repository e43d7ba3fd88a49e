"""Evaluation metrics: precision/recall vs ground truth, validity, Hit@k
necessity, clustering homogeneity, and hyperparameter sensitivity sweeps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .datasets import GroundTruth
from .graph import Explanation, Graph, perturb
from .knn import knn, knn_set
from .sage import SageModel, forward


def precision_recall(expl: Explanation, gt: GroundTruth) -> tuple[float, float]:
    """Overlap of the explanation's edges with the target's motif edges."""
    gt_edges = gt.motif_edges.get(expl.target, frozenset())
    hit = len(expl.edges & gt_edges)
    precision = hit / len(expl.edges) if expl.edges else 0.0
    recall = hit / len(gt_edges) if gt_edges else 0.0
    return precision, recall


def validity(importances) -> float:
    """Fraction of explanations that fully displace the top-k set."""
    vals = list(importances)
    if not vals:
        return 0.0
    return sum(1.0 for x in vals if x == 1.0) / len(vals)


def split_edges(g: Graph, test_fraction: float = 0.1, seed: int = 0):
    """Seeded train/test edge split; returns (train_graph, test_edges)."""
    rng = np.random.default_rng(seed)
    edges = sorted(g.edges)
    n_test = int(round(test_fraction * len(edges)))
    idx = rng.permutation(len(edges))
    test = frozenset(edges[i] for i in idx[:n_test])
    train = [e for e in edges if e not in test]
    train_g = Graph.build(g.num_nodes, train,
                          features=g.features, labels=g.labels)
    return train_g, test


def pn_hit_at_k(model: SageModel, g: Graph, explanations: list[Explanation],
                test_edges, k: int = 5) -> float:
    """Probability of necessity for top-k link prediction.

    A target counts when one of its held-out edge partners sits in its top-k
    before perturbation and none do afterwards; only hit-to-miss flips count.
    """
    partners: dict[int, set[int]] = {}
    for u, v in test_edges:
        partners.setdefault(u, set()).add(v)
        partners.setdefault(v, set()).add(u)
    base = forward(model, g).matrix
    flips = total = 0
    for expl in explanations:
        mates = partners.get(expl.target)
        if not mates:
            continue
        total += 1
        before = knn_set(base, expl.target, k)
        if not (before & mates):
            continue
        pert = forward(model, perturb(g, expl)).matrix
        after = knn_set(pert, expl.target, k)
        if not (after & mates):
            flips += 1
    return flips / total if total else 0.0


def hit_at_k(emb, test_edges, k: int = 5) -> float:
    """Fraction of test-edge endpoints whose partner appears in their top-k."""
    partners: dict[int, set[int]] = {}
    for u, v in test_edges:
        partners.setdefault(u, set()).add(v)
        partners.setdefault(v, set()).add(u)
    if not partners:
        return 0.0
    hits = 0
    for node, mates in partners.items():
        if knn_set(emb if isinstance(emb, np.ndarray) else emb.matrix,
                   node, k) & mates:
            hits += 1
    return hits / len(partners)


# ---------------------------------------------------------------------------
# k-means (k-means++ seeding + Lloyd iterations)


def kmeans_pp_init(x: np.ndarray, n_clusters: int, rng) -> np.ndarray:
    centroids = [x[rng.integers(0, x.shape[0])]]
    for _ in range(n_clusters - 1):
        d2 = np.min(
            [np.sum((x - c) ** 2, axis=1) for c in centroids], axis=0)
        total = d2.sum()
        if total == 0:
            centroids.append(x[rng.integers(0, x.shape[0])])
            continue
        r = rng.random() * total
        idx = int(np.searchsorted(np.cumsum(d2), r))
        centroids.append(x[min(idx, x.shape[0] - 1)])
    return np.array(centroids)


def assign_clusters(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def kmeans(x, n_clusters: int, seed: int = 0, max_iters: int = 300):
    """Deterministic Lloyd iterations from k-means++ seeding.

    Returns (assignment, centroids).
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(n_clusters, int) and n_clusters < 1:
        raise ValueError("n_clusters must be >= 1")
    rng = np.random.default_rng(seed)
    centroids = kmeans_pp_init(x, n_clusters, rng)
    assign = assign_clusters(x, centroids)
    for _ in range(max_iters):
        new_centroids = centroids.copy()
        for c in range(n_clusters):
            mask = assign == c
            if mask.any():
                new_centroids[c] = x[mask].mean(axis=0)
        new_assign = assign_clusters(x, new_centroids)
        if np.array_equal(new_assign, assign):
            centroids = new_centroids
            break
        centroids, assign = new_centroids, new_assign
    return assign, centroids


def homogeneity_after_perturb(model: SageModel, g: Graph, expl: Explanation,
                              v: int, n_clusters: int, k: int = 20,
                              seed: int = 0) -> float:
    """Fraction of v's original top-k neighbors sharing v's cluster after
    perturbation, with centroids frozen from the original embedding."""
    base = forward(model, g).matrix
    _, centroids = kmeans(base, n_clusters, seed=seed)
    top = knn(base, v, k).neighbors
    pert = forward(model, perturb(g, expl)).matrix if expl.edges else base
    assign = assign_clusters(pert, centroids)
    if not top:
        return 0.0
    return float(np.mean([assign[u] == assign[v] for u in top]))


# ---------------------------------------------------------------------------
# Reporting


@dataclass
class MetricsReport:
    per_node: list[dict] = field(default_factory=list)
    config_snapshot: dict = field(default_factory=dict)

    def aggregates(self) -> dict:
        by_method: dict[str, list[dict]] = {}
        for rec in self.per_node:
            by_method.setdefault(rec.get("method", "unknown"), []).append(rec)
        out = {}
        for method, recs in sorted(by_method.items()):
            agg = {"n_targets": len(recs)}
            numeric = [k for k in recs[0]
                       if isinstance(recs[0][k], (int, float)) and k != "target"]
            for key in numeric:
                vals = [r[key] for r in recs if r.get(key) is not None]
                if vals:
                    agg[f"mean_{key}"] = float(np.mean(vals))
            imps = [r["importance"] for r in recs if "importance" in r]
            if imps:
                agg["validity"] = validity(imps)
            out[method] = agg
        return out


def sensitivity_sweep(model: SageModel, g: Graph, targets, axis: str, values,
                      base_cfg=None, seed: int = 0):
    """Mean importance of the search per value of one hyperparameter."""
    from .mcts import ExplainerConfig, explain

    if axis not in ("k", "p_restart", "lam"):
        raise ValueError("axis must be one of k, p_restart, lam")
    base = base_cfg or ExplainerConfig()
    curve = []
    for val in values:
        kwargs = dict(k=base.k, lam=base.lam, p_restart=base.p_restart,
                      max_iters=base.max_iters,
                      expansion_cap=base.expansion_cap,
                      expand_all=base.expand_all,
                      max_subgraph_nodes=base.max_subgraph_nodes,
                      proximity_mode=base.proximity_mode,
                      q_update=base.q_update, seed=seed)
        kwargs[axis] = int(val) if axis == "k" else float(val)
        cfg = ExplainerConfig(**kwargs)
        imps = []
        for v in targets:
            cfg.seed = seed + v
            imps.append(explain(model, g, v, cfg).explanation.importance or 0.0)
        curve.append((val, float(np.mean(imps)) if imps else 0.0))
    return curve

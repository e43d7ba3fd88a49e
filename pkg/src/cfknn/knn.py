"""Top-k nearest neighbors in embedding space and the importance score.

Importance of a candidate subgraph = fraction of the target's original top-k
Euclidean neighbors displaced after removing the subgraph's edges and
re-embedding the graph. Ties in distance break toward the smaller node id.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .graph import Explanation, Graph, perturb
from .sage import Embedding, SageModel, forward


@dataclass
class KnnResult:
    target: int
    neighbors: list[int]
    distances: list[float]


def _clamp_k(k: int, n: int, warn: bool = True) -> int:
    if k >= n:
        if warn:
            warnings.warn(f"k={k} >= {n} nodes; clamping to {n - 1}")
        return n - 1
    return k


def knn(emb: Embedding | np.ndarray, v: int, k: int) -> KnnResult:
    """Exact top-k by Euclidean distance, excluding v itself."""
    mat = emb.matrix if isinstance(emb, Embedding) else np.asarray(emb)
    n = mat.shape[0]
    if not 0 <= v < n:
        raise ValueError(f"node {v} out of range")
    if k < 1:
        raise ValueError("k must be >= 1")
    k = _clamp_k(k, n)
    d2 = kernels.sq_dists_to(np.ascontiguousarray(mat, dtype=np.float64), v)
    d2[v] = np.inf
    order = np.lexsort((np.arange(n), d2))[:k]
    return KnnResult(v, order.tolist(), np.sqrt(d2[order]).tolist())


def knn_set(mat: np.ndarray, v: int, k: int) -> frozenset[int]:
    return frozenset(knn(mat, v, k).neighbors)


class ImportanceEvaluator:
    """Scores candidate subgraphs against a fixed (model, graph, target, k).

    Caches the base embedding, the base top-k set, the base CSR arrays, and
    previously scored edge sets, since the search re-evaluates heavily.
    """

    def __init__(self, model: SageModel, g: Graph, v: int, k: int):
        self.model = model
        self.g = g
        self.v = v
        self.k = _clamp_k(k, g.num_nodes)
        self.base_emb = forward(model, g).matrix
        self.base_topk = knn_set(self.base_emb, v, self.k)
        self._cache: dict[frozenset, float] = {}
        self.evals = 0

    def importance_of_edges(self, edges: frozenset) -> float:
        if not edges:
            return 0.0
        key = frozenset(edges)
        if key in self._cache:
            return self._cache[key]
        gp = perturb(self.g, Explanation(
            target=self.v,
            nodes=frozenset({self.v}) | {n for e in edges for n in e},
            edges=edges))
        emb_p = forward(self.model, gp).matrix
        new_topk = knn_set(emb_p, self.v, self.k)
        val = len(self.base_topk - new_topk) / self.k
        self._cache[key] = val
        self.evals += 1
        return val

    def __call__(self, expl: Explanation) -> float:
        return self.importance_of_edges(expl.edges)


def importance(model: SageModel, g: Graph, expl: Explanation, v: int,
               k: int) -> float:
    """|set(top-k before) - set(top-k after perturbation)| / k."""
    if expl.edges - g.edges:
        raise ValueError("explanation contains edges absent from the graph")
    if not expl.edges:
        return 0.0
    kk = _clamp_k(k, g.num_nodes)
    before = knn_set(forward(model, g).matrix, v, kk)
    after = knn_set(forward(model, perturb(g, expl)).matrix, v, kk)
    return len(before - after) / kk


class LshIndex:
    """Random-hyperplane LSH over an embedding; approximate top-k queries.

    With n_bits=0 every point lands in one bucket and queries are exact.
    """

    def __init__(self, emb: Embedding | np.ndarray, n_tables: int = 20,
                 n_bits: int = 4, seed: int = 0):
        if n_tables < 1 or n_bits < 0:
            raise ValueError("n_tables must be >= 1 and n_bits >= 0")
        self.mat = np.ascontiguousarray(
            emb.matrix if isinstance(emb, Embedding) else emb, dtype=np.float64)
        rng = np.random.default_rng(seed)
        d = self.mat.shape[1]
        self.planes = rng.standard_normal((n_tables, n_bits, d))
        self.offsets = np.median(self.mat, axis=0)
        centered = self.mat - self.offsets
        self.tables = []
        for t in range(n_tables):
            if n_bits == 0:
                sig = np.zeros(self.mat.shape[0], dtype=np.int64)
            else:
                bits = (centered @ self.planes[t].T) > 0
                sig = bits @ (1 << np.arange(n_bits))
            buckets: dict[int, list[int]] = {}
            for i, s in enumerate(sig):
                buckets.setdefault(int(s), []).append(i)
            self.tables.append((sig, buckets))

    def query(self, v: int, k: int) -> KnnResult:
        cand = set()
        for sig, buckets in self.tables:
            cand.update(buckets.get(int(sig[v]), ()))
        cand.discard(v)
        if len(cand) < k:  # widen to exact scan when buckets are too sparse
            cand = set(range(self.mat.shape[0])) - {v}
        idx = np.fromiter(sorted(cand), dtype=np.int64)
        diff = self.mat[idx] - self.mat[v]
        d2 = np.einsum("ij,ij->i", diff, diff)
        k = min(k, len(idx))
        order = np.lexsort((idx, d2))[:k]
        sel = idx[order]
        return KnnResult(v, sel.tolist(), np.sqrt(d2[order]).tolist())


def lsh_recall(emb, queries, k: int = 5, **kwargs) -> float:
    """Measured recall of the LSH index against exact search."""
    index = LshIndex(emb, **kwargs)
    hits = total = 0
    for v in queries:
        exact = set(knn(emb, v, k).neighbors)
        approx = set(index.query(v, k).neighbors)
        hits += len(exact & approx)
        total += len(exact)
    return hits / total if total else 1.0

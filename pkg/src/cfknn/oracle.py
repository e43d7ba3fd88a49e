"""Brute-force ground truth for small instances.

Enumerates every connected edge subset containing the target and scores each
with the same importance routine the search uses, so oracle and search share
a single scoring source of truth.
"""

from __future__ import annotations

from .graph import Explanation, Graph
from .knn import ImportanceEvaluator
from .sage import SageModel


class OracleBudgetExceeded(RuntimeError):
    def __init__(self, count: int, limit: int):
        super().__init__(
            f"candidate count reached {count} (limit {limit}); refuse to enumerate")
        self.count = count


def enumerate_connected_edge_subsets(g: Graph, v: int, max_edges: int,
                                     limit: int = 10 ** 6):
    """All connected edge subsets containing v with 1..max_edges edges.

    Subsets are grown edge-by-edge from the node set reached so far, which
    yields exactly the subgraphs a root-anchored walk can express.
    """
    results: set[frozenset] = set()

    def grow(edges: frozenset, nodes: frozenset):
        if len(results) > limit:
            raise OracleBudgetExceeded(len(results), limit)
        if len(edges) >= max_edges:
            return
        for u in sorted(nodes):
            for w in g.neighbors(u):
                e = (u, w) if u < w else (w, u)
                if e in edges:
                    continue
                nxt = edges | {e}
                if nxt in results:
                    continue
                results.add(nxt)
                grow(nxt, nodes | {w})

    grow(frozenset(), frozenset({v}))
    return sorted(results, key=lambda s: sorted(s))


def best_subgraph_bruteforce(model: SageModel, g: Graph, v: int, k: int,
                             max_edges: int,
                             limit: int = 10 ** 6) -> tuple[Explanation, float]:
    """Exhaustive argmax-importance / argmin-size over the candidate space.

    Ties in (importance, size) break toward the lexicographically smallest
    edge set.
    """
    subsets = enumerate_connected_edge_subsets(g, v, max_edges, limit)
    evaluator = ImportanceEvaluator(model, g, v, k)
    best = None
    for edges in subsets:
        imp = evaluator.importance_of_edges(edges)
        key = (-imp, len(edges), sorted(edges))
        if best is None or key < best[0]:
            best = (key, edges, imp)
    if best is None:
        expl = Explanation(target=v, nodes=frozenset({v}), edges=frozenset(),
                           importance=0.0)
        return expl, 0.0
    _, edges, imp = best
    nodes = frozenset({v}) | {n for e in edges for n in e}
    return Explanation(target=v, nodes=nodes, edges=edges, importance=imp), imp


def assumption1_probe(model: SageModel, g: Graph, v: int, k: int,
                      samples: int, seed: int = 0, max_edges: int = 4) -> float:
    """Fraction of sampled nested edge-set pairs E2 in E1 where the smaller
    set scores strictly higher importance. Diagnostic only; the monotonicity
    premise is empirical, never asserted."""
    import numpy as np

    rng = np.random.default_rng(seed)
    subsets = enumerate_connected_edge_subsets(g, v, max_edges)
    bigger = [s for s in subsets if len(s) >= 2]
    if not bigger:
        return 0.0
    evaluator = ImportanceEvaluator(model, g, v, k)
    violations = 0
    for _ in range(samples):
        e1 = bigger[rng.integers(0, len(bigger))]
        drop = sorted(e1)[rng.integers(0, len(e1))]
        e2 = e1 - {drop}
        if evaluator.importance_of_edges(e2) > evaluator.importance_of_edges(e1):
            violations += 1
    return violations / samples

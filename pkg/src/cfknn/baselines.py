"""Comparison explainers and the MCTS ablation matrix.

All baselines emit the same Explanation type as the main search, rooted at
the target, so the evaluation harness treats every method uniformly.
"""

from __future__ import annotations

import numpy as np

from .graph import Explanation, Graph, canonical
from .knn import ImportanceEvaluator, knn
from .mcts import ExplainerConfig, SearchResult, explain
from .sage import Embedding, SageModel


def _empty(v: int) -> Explanation:
    return Explanation(target=v, nodes=frozenset({v}), edges=frozenset(),
                       importance=None)


def onehop_2n(g: Graph, v: int, rng) -> Explanation:
    """Target plus one uniformly random 1-hop neighbor and their edge."""
    nbrs = g.neighbors(v)
    if not nbrs:
        return _empty(v)
    u = nbrs[rng.integers(0, len(nbrs))]
    return Explanation(target=v, nodes=frozenset({v, u}),
                       edges=frozenset({canonical(v, u)}))


def onehop_3n(g: Graph, v: int, rng) -> Explanation:
    """Target plus two random 1-hop neighbors with the induced edges."""
    nbrs = g.neighbors(v)
    if len(nbrs) < 2:
        return onehop_2n(g, v, rng)
    pick = rng.choice(len(nbrs), size=2, replace=False)
    a, b = nbrs[pick[0]], nbrs[pick[1]]
    nodes = {v, a, b}
    edges = {e for e in g.edges if e[0] in nodes and e[1] in nodes}
    return Explanation(target=v, nodes=frozenset(nodes), edges=frozenset(edges))


def knn_graph(g: Graph, emb: Embedding | np.ndarray, v: int,
              k: int = 5) -> Explanation:
    """Top-k embedding neighbors of v with the input-graph edges they induce.

    The edge set may be empty: embedding neighbors need not be graph-adjacent.
    """
    nodes = {v} | set(knn(emb, v, k).neighbors)
    edges = {e for e in g.edges if e[0] in nodes and e[1] in nodes}
    return Explanation(target=v, nodes=frozenset(nodes), edges=frozenset(edges))


def rw_subgraph(g: Graph, v: int, target_size: int, rng,
                p_restart: float = 0.0) -> Explanation:
    """Collect edges along a random walk from v until target_size is reached.

    With p_restart the walk jumps back to v before a step, so collected edges
    concentrate around the target.
    """
    if not g.neighbors(v) or target_size < 1:
        return _empty(v)
    edges: set = set()
    cur = v
    budget = 20 * target_size + 20
    while len(edges) < target_size and budget > 0:
        budget -= 1
        if p_restart > 0 and rng.random() < p_restart:
            cur = v
        nbrs = g.neighbors(cur)
        if not nbrs:
            cur = v
            continue
        nxt = nbrs[rng.integers(0, len(nbrs))]
        edges.add(canonical(cur, nxt))
        cur = nxt
    nodes = {v} | {n for e in edges for n in e}
    return Explanation(target=v, nodes=frozenset(nodes), edges=frozenset(edges))


# ---------------------------------------------------------------------------
# Pruning-action search (SubgraphX-style rows of the ablation matrix)


def _component_of(nodes: frozenset, v: int, g: Graph) -> frozenset:
    seen = {v}
    stack = [v]
    while stack:
        cur = stack.pop()
        for u in g.neighbors(cur):
            if u in nodes and u not in seen:
                seen.add(u)
                stack.append(u)
    return frozenset(seen)


def _induced_edges(nodes: frozenset, g: Graph) -> frozenset:
    return frozenset(e for e in g.edges if e[0] in nodes and e[1] in nodes)


def prune_search(model: SageModel, g: Graph, v: int,
                 cfg: ExplainerConfig | None = None,
                 init_hops: int = 2) -> SearchResult:
    """MCTS whose action removes one node from the target's ego region.

    States are node sets starting from the h-hop ego network; candidates are
    the induced subgraphs of visited states. Kept deliberately simple: it is
    the comparison arm of the ablation, not the main method.
    """
    from .graph import ego
    from .mcts import EdgeStats, ucb

    cfg = cfg or ExplainerConfig()
    rng = np.random.default_rng(cfg.seed)
    if not g.neighbors(v):
        return SearchResult(_empty_with_importance(v), 0, 0, inexplicable=True)
    evaluator = ImportanceEvaluator(model, g, v, cfg.k)
    root_state = _component_of(ego(g, v, init_hops).nodes, v, g)

    children: dict[frozenset, list[tuple[frozenset, EdgeStats]]] = {}
    candidates: dict[frozenset, tuple[float, int]] = {}

    def reward_of(nodes: frozenset) -> float:
        edges = _induced_edges(nodes, g)
        val = evaluator.importance_of_edges(edges)
        if edges and edges not in candidates:
            candidates[edges] = (val, len(candidates))
        return val

    def expand_state(nodes: frozenset):
        removable = sorted(nodes - {v})
        if not cfg.expand_all and len(removable) > 3:
            idx = sorted(rng.choice(len(removable), size=3, replace=False))
            removable = [removable[i] for i in idx]
        out = []
        for r in removable:
            nxt = _component_of(nodes - {r}, v, g)
            if len(nxt) >= 2:
                out.append((nxt, EdgeStats()))
        return out

    iters = 0
    for t in range(cfg.max_iters):
        iters = t + 1
        path = []
        cur = root_state
        while True:
            if cur not in children:
                children[cur] = expand_state(cur)
            acts = children[cur]
            if not acts:
                break
            scores = [ucb(st, t, cfg.lam) for _, st in acts]
            ai = int(np.argmax(scores))
            path.append((cur, ai))
            cur = acts[ai][0]
            if len(cur) <= 2:
                break
        r = reward_of(cur)
        for nodes, ai in path:
            stats = children[nodes][ai][1]
            stats.visits += 1
            stats.rewards.append(r)
            stats.q = (max(stats.rewards) if cfg.q_update == "max"
                       else sum(stats.rewards) / len(stats.rewards))
        if r == 1.0:
            break

    if not candidates:
        return SearchResult(_empty_with_importance(v), iters, 0,
                            inexplicable=True)
    best_edges, (best_imp, _) = min(
        candidates.items(), key=lambda kv: (-kv[1][0], len(kv[0]), kv[1][1]))
    nodes = frozenset({v}) | {n for e in best_edges for n in e}
    expl = Explanation(target=v, nodes=nodes, edges=best_edges,
                       importance=best_imp)
    return SearchResult(expl, iters, len(candidates))


def _empty_with_importance(v: int) -> Explanation:
    return Explanation(target=v, nodes=frozenset({v}), edges=frozenset(),
                       importance=0.0)


# ---------------------------------------------------------------------------
# Ablation matrix: (action, expand_all, restart, q_update, proximity)

VARIANTS = {
    "mcts": ("add", True, False, "avg", "constant"),
    "subgraphx-all": ("prune", True, False, "avg", "constant"),
    "subgraphx-sample": ("prune", False, False, "avg", "constant"),
    "mcts-avg": ("add", False, False, "avg", "constant"),
    "prx-degree": ("add", False, False, "max", "degree"),
    "prx-common": ("add", False, False, "max", "common_neighbors"),
    "prx-cosine": ("add", False, False, "max", "feature_cosine"),
    "no-restart": ("add", False, False, "max", "constant"),
    "full": ("add", False, True, "max", "constant"),
}
ALIASES = {"unr": "full", "restart": "full"}


def ablation_variant(variant_id: str, model: SageModel, g: Graph, v: int,
                     base_cfg: ExplainerConfig | None = None) -> SearchResult:
    """Dispatch the search engine with one row of the ablation matrix."""
    key = ALIASES.get(variant_id.lower(), variant_id.lower())
    if key not in VARIANTS:
        raise ValueError(f"unknown variant {variant_id!r}; "
                         f"choose from {sorted(VARIANTS)}")
    action, expand_all, restart, q_update, prox = VARIANTS[key]
    base = base_cfg or ExplainerConfig()
    cfg = ExplainerConfig(
        k=base.k, lam=base.lam,
        p_restart=base.p_restart if restart else 0.0,
        max_iters=base.max_iters, expansion_cap=base.expansion_cap,
        expand_all=expand_all, max_subgraph_nodes=base.max_subgraph_nodes,
        proximity_mode=prox, q_update=q_update, seed=base.seed)
    if action == "prune":
        return prune_search(model, g, v, cfg)
    return explain(model, g, v, cfg)

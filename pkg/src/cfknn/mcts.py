"""Subgraph search by Monte Carlo tree search with a restart selection policy.

Tree nodes carry a graph-node id as state; an action descends to a child whose
state is a graph-neighbor of the parent's state, which grows the candidate
subgraph by one edge. The reward of a trajectory is the importance of the
subgraph it spells out. With probability p_restart the walk jumps back to the
root and takes a deliberately non-optimal root action, biasing candidates
toward breadth around the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Explanation, Graph, canonical
from .knn import ImportanceEvaluator
from .sage import SageModel

UNVISITED = math.inf


@dataclass
class EdgeStats:
    visits: int = 0
    q: float = 0.0
    rewards: list[float] = field(default_factory=list)


@dataclass
class Action:
    child: int  # index into SearchTree.nodes
    stats: EdgeStats = field(default_factory=EdgeStats)
    proximity: float = 1.0


@dataclass
class TreeNode:
    state: int
    actions: list[Action] = field(default_factory=list)
    arrivals: int = 0


@dataclass
class SearchTree:
    nodes: list[TreeNode] = field(default_factory=list)

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    def add(self, state: int) -> int:
        self.nodes.append(TreeNode(state))
        return len(self.nodes) - 1


@dataclass
class ExplainerConfig:
    k: int = 5
    lam: float = 1.0
    p_restart: float = 0.2
    max_iters: int = 1000
    expansion_cap: int | None = None  # None -> round(avg degree)
    expand_all: bool = False
    max_subgraph_nodes: int = 20
    proximity_mode: str = "constant"  # constant | degree | common_neighbors | feature_cosine
    q_update: str = "max"  # max | avg
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_restart <= 1.0:
            raise ValueError("p_restart must be in [0, 1]")
        for name in ("k", "max_iters", "max_subgraph_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.proximity_mode not in (
                "constant", "degree", "common_neighbors", "feature_cosine"):
            raise ValueError(f"unknown proximity mode {self.proximity_mode!r}")
        if self.q_update not in ("max", "avg"):
            raise ValueError("q_update must be 'max' or 'avg'")


def ucb(stats: EdgeStats, root_visits: int, lam: float,
        proximity: float = 1.0) -> float:
    """Q + lam * P * sqrt(ln(root visits) / visits); +inf when unvisited."""
    if stats.visits == 0:
        return UNVISITED
    explore = math.sqrt(math.log(max(root_visits, 1)) / stats.visits)
    return stats.q + lam * proximity * explore


def _proximity(g: Graph, target: int, state: int, mode: str) -> float:
    if mode == "constant":
        return 1.0
    if mode == "degree":
        return g.degree(state) / max(g.avg_degree(), 1e-12)
    if mode == "common_neighbors":
        common = len(set(g.neighbors(state)) & set(g.neighbors(target)))
        return (common + 1) / (g.degree(target) + 1)
    if mode == "feature_cosine":
        a, b = g.features[state], g.features[target]
        denom = np.linalg.norm(a) * np.linalg.norm(b)
        if denom == 0:
            return 0.0
        return float(max(np.dot(a, b) / denom, 0.0))
    raise ValueError(mode)


def _best_action(node: TreeNode, root_visits: int, lam: float,
                 tree: SearchTree) -> int:
    """Argmax-UCB action index; ties break toward the lowest child state id."""
    best, best_key = -1, None
    for i, act in enumerate(node.actions):
        score = ucb(act.stats, root_visits, lam, act.proximity)
        key = (-score, tree.nodes[act.child].state)
        if best_key is None or key < best_key:
            best, best_key = i, key
    return best


def expand(tree: SearchTree, node_idx: int, g: Graph, cfg: ExplainerConfig,
           rng) -> int:
    """Add sampled (or all) graph-neighbor children under an unexpanded node."""
    node = tree.nodes[node_idx]
    if node.actions:
        return 0
    nbrs = g.neighbors(node.state)
    if not nbrs:
        return 0
    if cfg.expand_all:
        chosen = nbrs
    else:
        cap = cfg.expansion_cap or max(1, round(g.avg_degree()))
        if len(nbrs) <= cap:
            chosen = nbrs
        else:
            chosen = sorted(rng.choice(len(nbrs), size=cap, replace=False))
            chosen = [nbrs[i] for i in chosen]
    for s in chosen:
        child = tree.add(int(s))
        node.actions.append(Action(
            child, proximity=_proximity(g, tree.root.state, int(s),
                                        cfg.proximity_mode)))
    return len(chosen)


def select_and_descend(tree: SearchTree, g: Graph, cfg: ExplainerConfig, rng,
                       root_visits: int) -> list[tuple[int, int]]:
    """One walk from the root to a leaf; returns (node_idx, action_idx) steps.

    Before each step a restart is drawn: the walk jumps to the root and takes
    a uniformly random root action other than the UCB-optimal one (falling
    back to the optimum when the root has a single action).
    """
    traj: list[tuple[int, int]] = []
    cur = 0
    states = {tree.root.state}
    max_steps = 8 * cfg.max_subgraph_nodes
    while tree.nodes[cur].actions and len(traj) < max_steps:
        if rng.random() < cfg.p_restart:
            cur = 0
            root = tree.root
            a_star = _best_action(root, root_visits, cfg.lam, tree)
            others = [i for i in range(len(root.actions)) if i != a_star]
            ai = int(others[rng.integers(0, len(others))]) if others else a_star
        else:
            ai = _best_action(tree.nodes[cur], root_visits, cfg.lam, tree)
        child = tree.nodes[cur].actions[ai].child
        child_state = tree.nodes[child].state
        if child_state not in states and len(states) >= cfg.max_subgraph_nodes:
            break
        traj.append((cur, ai))
        states.add(child_state)
        cur = child
    return traj


def convert(tree: SearchTree, traj: list[tuple[int, int]],
            target: int) -> Explanation:
    """Trajectory -> subgraph: one edge per step between the step's endpoint
    states, deduplicated."""
    edges = set()
    nodes = {target}
    for node_idx, ai in traj:
        u = tree.nodes[node_idx].state
        v = tree.nodes[tree.nodes[node_idx].actions[ai].child].state
        edges.add(canonical(u, v))
        nodes.update((u, v))
    return Explanation(target=target, nodes=frozenset(nodes),
                       edges=frozenset(edges))


def backpropagate(tree: SearchTree, traj: list[tuple[int, int]],
                  reward: float, q_update: str = "max") -> None:
    for node_idx, ai in traj:
        stats = tree.nodes[node_idx].actions[ai].stats
        stats.visits += 1
        stats.rewards.append(reward)
        stats.q = (max(stats.rewards) if q_update == "max"
                   else sum(stats.rewards) / len(stats.rewards))


@dataclass
class SearchResult:
    explanation: Explanation
    iterations: int
    candidates: int
    inexplicable: bool = False


def explain(model: SageModel, g: Graph, v: int,
            cfg: ExplainerConfig | None = None,
            evaluator: ImportanceEvaluator | None = None) -> SearchResult:
    """Run the full search for one target and pick, among the candidates with
    maximal importance, the earliest one with the fewest edges."""
    cfg = cfg or ExplainerConfig()
    rng = np.random.default_rng(cfg.seed)
    if not g.neighbors(v):
        empty = Explanation(target=v, nodes=frozenset({v}), edges=frozenset(),
                            importance=0.0)
        return SearchResult(empty, 0, 0, inexplicable=True)
    evaluator = evaluator or ImportanceEvaluator(model, g, v, cfg.k)
    tree = SearchTree()
    tree.add(v)
    expand(tree, 0, g, cfg, rng)

    candidates: dict[frozenset, tuple[float, int]] = {}
    iters = 0
    for t in range(cfg.max_iters):
        iters = t + 1
        traj = select_and_descend(tree, g, cfg, rng, root_visits=t)
        leaf = traj[-1] if traj else (0, None)
        leaf_idx = tree.nodes[leaf[0]].actions[leaf[1]].child if traj else 0
        leaf_node = tree.nodes[leaf_idx]
        if leaf_node.arrivals >= 1 and not leaf_node.actions:
            if expand(tree, leaf_idx, g, cfg, rng):
                ai = _best_action(leaf_node, t, cfg.lam, tree)
                traj.append((leaf_idx, ai))
                leaf_idx = leaf_node.actions[ai].child
        tree.nodes[leaf_idx].arrivals += 1
        if not traj:
            continue
        expl = convert(tree, traj, v)
        reward = evaluator.importance_of_edges(expl.edges)
        backpropagate(tree, traj, reward, cfg.q_update)
        if expl.edges not in candidates:
            candidates[expl.edges] = (reward, len(candidates))
        if reward == 1.0:
            break

    if not candidates:
        empty = Explanation(target=v, nodes=frozenset({v}), edges=frozenset(),
                            importance=0.0)
        return SearchResult(empty, iters, 0, inexplicable=True)
    best_edges, (best_imp, _) = min(
        candidates.items(),
        key=lambda kv: (-kv[1][0], len(kv[0]), kv[1][1]))
    nodes = frozenset({v}) | {n for e in best_edges for n in e}
    expl = Explanation(target=v, nodes=nodes, edges=best_edges,
                       importance=best_imp)
    return SearchResult(expl, iters, len(candidates))

"""Core graph representation, perturbation and neighborhood utilities.

Graphs are undirected, simple (no self-loops, no duplicate edges), with dense
integer node ids 0..N-1. Each edge is stored once in canonical (min, max)
order with a weight in [0, 1]. Graphs are immutable after construction; every
"mutation" returns a fresh Graph.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

Edge = tuple[int, int]


class GraphError(ValueError):
    pass


def canonical(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Graph:
    num_nodes: int
    edges: frozenset[Edge]
    weights: dict[Edge, float]
    features: np.ndarray
    labels: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @staticmethod
    def build(num_nodes, edges, features=None, weights=None, labels=None,
              feature_dim=10):
        """Validate and canonicalize raw inputs into a Graph."""
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise GraphError(f"edge ({u}, {v}) endpoint out of range")
            canon.add(canonical(u, v))
        if features is None:
            features = np.ones((num_nodes, feature_dim), dtype=np.float64)
        else:
            features = np.asarray(features, dtype=np.float64)
            if features.shape[0] != num_nodes:
                raise GraphError(
                    f"features has {features.shape[0]} rows, expected {num_nodes}")
        w = {}
        for e in canon:
            we = 1.0 if weights is None else float(weights.get(e, 1.0))
            if not 0.0 <= we <= 1.0:
                raise GraphError(f"weight {we} for edge {e} outside [0, 1]")
            w[e] = we
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
        return Graph(num_nodes, frozenset(canon), w, features, labels)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def csr(self):
        """Adjacency as (indptr, indices) int64 arrays, neighbors sorted."""
        if "csr" not in self._cache:
            deg = np.zeros(self.num_nodes, dtype=np.int64)
            if self.edges:
                arr = np.array(sorted(self.edges), dtype=np.int64)
                both = np.concatenate([arr, arr[:, ::-1]])
                order = np.lexsort((both[:, 1], both[:, 0]))
                both = both[order]
                np.add.at(deg, both[:, 0], 1)
                indices = np.ascontiguousarray(both[:, 1])
            else:
                indices = np.zeros(0, dtype=np.int64)
            indptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
            self._cache["csr"] = (indptr, indices)
        return self._cache["csr"]

    def neighbors(self, v: int) -> list[int]:
        """Sorted neighbor list of v."""
        if not 0 <= v < self.num_nodes:
            raise GraphError(f"node {v} out of range")
        indptr, indices = self.csr()
        return indices[indptr[v]:indptr[v + 1]].tolist()

    def degree(self, v: int) -> int:
        indptr, _ = self.csr()
        return int(indptr[v + 1] - indptr[v])

    def avg_degree(self) -> float:
        if self.num_nodes == 0:
            raise GraphError("empty graph has no average degree")
        return 2.0 * len(self.edges) / self.num_nodes

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.num_nodes).encode())
        for e in sorted(self.edges):
            h.update(f"{e[0]},{e[1]},{self.weights[e]!r};".encode())
        h.update(np.ascontiguousarray(self.features).tobytes())
        if self.labels is not None:
            h.update(self.labels.tobytes())
        return h.hexdigest()


@dataclass
class Explanation:
    """A subgraph rooted at a target node, with its importance when scored."""

    target: int
    nodes: frozenset[int]
    edges: frozenset[Edge]
    importance: float | None = None

    def __post_init__(self):
        self.nodes = frozenset(self.nodes)
        self.edges = frozenset(canonical(*e) for e in self.edges)
        if self.target not in self.nodes:
            raise GraphError("explanation must contain its target node")
        for u, v in self.edges:
            if u not in self.nodes or v not in self.nodes:
                raise GraphError(f"edge ({u}, {v}) endpoint outside node set")

    @property
    def size(self) -> int:
        return len(self.edges)


def perturb(g: Graph, expl: Explanation, weaken_factor: float | None = None) -> Graph:
    """Remove the explanation's edges from g (or scale their weights).

    Default semantics remove the edges outright. With ``weaken_factor`` set,
    edges are kept and their weights multiplied by the factor instead.
    """
    stale = expl.edges - g.edges
    if stale:
        raise GraphError(f"explanation edges not in graph: {sorted(stale)[:5]}")
    if weaken_factor is None:
        kept = g.edges - expl.edges
        weights = {e: g.weights[e] for e in kept}
        return Graph(g.num_nodes, frozenset(kept), weights, g.features, g.labels)
    weights = dict(g.weights)
    for e in expl.edges:
        weights[e] = weights[e] * weaken_factor
    return Graph(g.num_nodes, g.edges, weights, g.features, g.labels)


def ego(g: Graph, v: int, hops: int) -> Explanation:
    """Induced subgraph on all nodes within `hops` of v, rooted at v."""
    if hops < 1:
        raise GraphError("hops must be >= 1")
    if not 0 <= v < g.num_nodes:
        raise GraphError(f"node {v} out of range")
    frontier = {v}
    nodes = {v}
    for _ in range(hops):
        nxt = set()
        for u in frontier:
            nxt.update(g.neighbors(u))
        frontier = nxt - nodes
        nodes |= nxt
    edges = {e for e in g.edges if e[0] in nodes and e[1] in nodes}
    return Explanation(target=v, nodes=frozenset(nodes), edges=frozenset(edges))


def save_edgelist(g: Graph, path) -> None:
    with open(path, "w") as f:
        f.write(f"# nodes {g.num_nodes}\n")
        for u, v in sorted(g.edges):
            f.write(f"{u} {v} {g.weights[(u, v)]!r}\n")


def load_edgelist(path, num_nodes: int | None = None, features=None,
                  labels=None) -> Graph:
    """Read the `u v [w]` text format; weight defaults to 1.0."""
    edges = []
    weights = {}
    declared = num_nodes
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes":
                    declared = int(parts[1])
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: unparseable line {line!r}") from exc
            e = canonical(u, v)
            edges.append(e)
            weights[e] = w
    if declared is None:
        declared = max((max(e) for e in edges), default=-1) + 1
    return Graph.build(declared, edges, features=features, weights=weights,
                       labels=labels)

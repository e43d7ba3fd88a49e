"""Mean-aggregator embedding model: forward pass, contrastive training,
persistence, and the one-layer pairwise-distance-shift bound.

Each layer computes h_v = act(W_self x_v + W_agg mean_{u in N(v)} x_u); nodes
without neighbors use a zero aggregate. The aggregate is an unweighted mean
(edge weights do not enter unless ``weighted_mean`` is enabled).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .graph import Explanation, Graph, GraphError, perturb

LIPSCHITZ = {"relu": 1.0, "tanh": 1.0, "sigmoid": 0.25}


class ModelError(ValueError):
    pass


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


def _act(name, x):
    if name == "relu":
        return np.maximum(x, 0.0)
    if name == "tanh":
        return np.tanh(x)
    if name == "sigmoid":
        return 1.0 / (1.0 + np.exp(-x))
    raise ModelError(f"unknown activation {name!r}")


def _act_grad(name, pre):
    if name == "relu":
        return (pre > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - np.tanh(pre) ** 2
    if name == "sigmoid":
        s = 1.0 / (1.0 + np.exp(-pre))
        return s * (1.0 - s)
    raise ModelError(f"unknown activation {name!r}")


@dataclass
class SageModel:
    layers: list[tuple[np.ndarray, np.ndarray]]  # (W_self, W_agg), d_in x d_out
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in LIPSCHITZ:
            raise ModelError(f"unknown activation {self.activation!r}")
        for i in range(len(self.layers) - 1):
            if self.layers[i][0].shape[1] != self.layers[i + 1][0].shape[0]:
                raise ModelError(
                    f"layer {i} output dim {self.layers[i][0].shape[1]} does not "
                    f"chain into layer {i + 1}")
        for ws, wa in self.layers:
            if ws.shape != wa.shape:
                raise ModelError("W_self and W_agg shapes differ")
            if not (np.isfinite(ws).all() and np.isfinite(wa).all()):
                raise ModelError("non-finite model weights")

    @property
    def lipschitz_constant(self) -> float:
        return LIPSCHITZ[self.activation]

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[0]

    def weight_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.activation.encode())
        for ws, wa in self.layers:
            h.update(np.ascontiguousarray(ws).tobytes())
            h.update(np.ascontiguousarray(wa).tobytes())
        return h.hexdigest()


@dataclass
class Embedding:
    matrix: np.ndarray
    model_hash: str = ""
    graph_hash: str = ""

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if not np.isfinite(self.matrix).all():
            raise ModelError("embedding contains non-finite entries")

    @property
    def num_nodes(self) -> int:
        return self.matrix.shape[0]


def init_model(feature_dim: int, hidden_dim: int = 64, num_layers: int = 2,
               activation: str = "relu", seed: int = 0) -> SageModel:
    """Glorot-uniform initialization, deterministic under seed."""
    rng = np.random.default_rng(seed)
    dims = [feature_dim] + [hidden_dim] * num_layers
    layers = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (d_in + d_out))
        layers.append((rng.uniform(-bound, bound, (d_in, d_out)),
                       rng.uniform(-bound, bound, (d_in, d_out))))
    return SageModel(layers, activation)


def _forward_states(model: SageModel, indptr, indices, x):
    """All hidden states and pre-activations (needed for backprop)."""
    hs = [x]
    pres = []
    h = x
    for ws, wa in model.layers:
        agg = kernels.neighbor_mean(indptr, indices, np.ascontiguousarray(h))
        pre = h @ ws + agg @ wa
        h = _act(model.activation, pre)
        pres.append(pre)
        hs.append(h)
    return hs, pres


def forward(model: SageModel, g: Graph) -> Embedding:
    """Deterministic full-graph forward pass."""
    if g.features.shape[1] != model.input_dim:
        raise ModelError(
            f"feature dim {g.features.shape[1]} != model input dim {model.input_dim}")
    indptr, indices = g.csr()
    hs, _ = _forward_states(model, indptr, indices, g.features)
    return Embedding(hs[-1], model.weight_hash(), "")


def _neighbor_mean_t(indptr, indices, d):
    """Apply the transpose of the row-normalized adjacency to d."""
    n = indptr.shape[0] - 1
    deg = np.diff(indptr)
    rows = np.repeat(np.arange(n), deg)
    contrib = d / np.maximum(deg, 1)[:, None]
    out = np.zeros_like(d)
    np.add.at(out, indices, contrib[rows])
    return out


def loss_and_grad(model: SageModel, g: Graph, pos_pairs, neg_pairs,
                  margin: float = 1.0):
    """Euclidean contrastive loss over (v, positive) and (v, negative) pairs.

    Positives are pulled together, negatives pushed past a margin:
        loss = mean_pos ||z_v - z_p||^2 + mean_neg max(0, m - ||z_v - z_n||)^2
    The Euclidean form matters: the explainer's kNN uses Euclidean distance,
    so the training objective must shape the same geometry.
    Returns (loss, per-layer (dW_self, dW_agg)).
    """
    indptr, indices = g.csr()
    hs, pres = _forward_states(model, indptr, indices, g.features)
    z = hs[-1]
    dz = np.zeros_like(z)
    loss = 0.0
    if len(pos_pairs):
        vs, ps = pos_pairs[:, 0], pos_pairs[:, 1]
        diff = z[vs] - z[ps]
        d2 = np.einsum("ij,ij->i", diff, diff)
        n_pos = len(pos_pairs)
        loss += float(d2.sum()) / n_pos
        np.add.at(dz, vs, 2.0 * diff / n_pos)
        np.add.at(dz, ps, -2.0 * diff / n_pos)
    if len(neg_pairs):
        vs, ns = neg_pairs[:, 0], neg_pairs[:, 1]
        diff = z[vs] - z[ns]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff) + 1e-12)
        viol = np.maximum(margin - d, 0.0)
        n_neg = len(neg_pairs)
        loss += float((viol ** 2).sum()) / n_neg
        coef = (-2.0 * viol / d)[:, None] / n_neg
        np.add.at(dz, vs, coef * diff)
        np.add.at(dz, ns, -coef * diff)

    grads = [None] * len(model.layers)
    dh = dz
    for li in range(len(model.layers) - 1, -1, -1):
        ws, wa = model.layers[li]
        h_in = hs[li]
        agg_in = kernels.neighbor_mean(indptr, indices, np.ascontiguousarray(h_in))
        gpre = dh * _act_grad(model.activation, pres[li])
        grads[li] = (h_in.T @ gpre, agg_in.T @ gpre)
        if li > 0:
            dh = gpre @ ws.T + _neighbor_mean_t(indptr, indices, gpre) @ wa.T
    return loss, grads


@dataclass
class TrainConfig:
    epochs: int = 100
    lr: float = 0.01
    hidden_dim: int = 64
    num_layers: int = 2
    activation: str = "relu"
    walk_length: int = 3
    walks_per_node: int = 2
    negatives: int = 5
    margin: float = 1.0


def _sample_pairs(g: Graph, cfg: TrainConfig, rng):
    """Positive pairs from short random walks; negatives uniform at random."""
    indptr, indices = g.csr()
    pos = []
    for v in range(g.num_nodes):
        if indptr[v + 1] == indptr[v]:
            continue
        for _ in range(cfg.walks_per_node):
            cur = v
            for _ in range(cfg.walk_length):
                nbrs = indices[indptr[cur]:indptr[cur + 1]]
                if len(nbrs) == 0:
                    break
                cur = int(nbrs[rng.integers(0, len(nbrs))])
                if cur != v:
                    pos.append((v, cur))
    pos = np.array(pos, dtype=np.int64).reshape(-1, 2)
    neg_v = np.repeat(pos[:, 0], cfg.negatives)
    neg_n = rng.integers(0, g.num_nodes, size=len(neg_v))
    neg = np.stack([neg_v, neg_n], axis=1)
    return pos, neg


def train_unsupervised(g: Graph, cfg: TrainConfig | None = None,
                       seed: int = 0, verbose: bool = False) -> SageModel:
    """Full-batch contrastive training with Adam; deterministic under seed."""
    if g.num_nodes == 0:
        raise ModelError("cannot train on an empty graph")
    cfg = cfg or TrainConfig()
    rng = np.random.default_rng(seed)
    model = init_model(g.features.shape[1], cfg.hidden_dim, cfg.num_layers,
                       cfg.activation, seed=seed)
    params = [w for layer in model.layers for w in layer]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    for epoch in range(cfg.epochs):
        pos, neg = _sample_pairs(g, cfg, rng)
        loss, grads = loss_and_grad(model, g, pos, neg, margin=cfg.margin)
        if not np.isfinite(loss):
            raise TrainingDiverged(epoch)
        flat = [gw for layer in grads for gw in layer]
        step += 1
        for i, (p, gr) in enumerate(zip(params, flat)):
            m[i] = b1 * m[i] + (1 - b1) * gr
            v[i] = b2 * v[i] + (1 - b2) * gr * gr
            mh = m[i] / (1 - b1 ** step)
            vh = v[i] / (1 - b2 ** step)
            p -= cfg.lr * mh / (np.sqrt(vh) + eps)
        if verbose and epoch % 10 == 0:
            print(f"epoch {epoch}: loss {loss:.4f}")
    return model


MODEL_FORMAT_VERSION = 1


def save_model(model: SageModel, path) -> None:
    arrays = {"version": np.array([MODEL_FORMAT_VERSION]),
              "activation": np.array([model.activation]),
              "num_layers": np.array([len(model.layers)])}
    for i, (ws, wa) in enumerate(model.layers):
        arrays[f"w_self_{i}"] = ws
        arrays[f"w_agg_{i}"] = wa
    np.savez(path, **arrays)


def load_model(path) -> SageModel:
    try:
        with np.load(path, allow_pickle=False) as data:
            if int(data["version"][0]) != MODEL_FORMAT_VERSION:
                raise ModelError(f"unsupported model format in {path}")
            n = int(data["num_layers"][0])
            layers = [(data[f"w_self_{i}"], data[f"w_agg_{i}"]) for i in range(n)]
            return SageModel(layers, str(data["activation"][0]))
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"cannot load model from {path}: {exc}") from exc


def save_embedding(emb: Embedding, path) -> None:
    np.savetxt(path, emb.matrix, delimiter=",")


def load_external_embedding(path, g: Graph) -> Embedding:
    """Wrap an externally produced N x d embedding CSV.

    External embeddings support kNN and evaluation, but not importance (no
    forward-capable model is available to re-embed perturbed graphs).
    """
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError:
        mat = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if mat.shape[0] != g.num_nodes:
        raise ModelError(
            f"embedding has {mat.shape[0]} rows, graph has {g.num_nodes} nodes")
    return Embedding(mat, model_hash="external", graph_hash=g.content_hash())


def _neighbor_mean_of(g: Graph):
    indptr, indices = g.csr()
    return kernels.neighbor_mean(indptr, indices,
                                 np.ascontiguousarray(g.features))


def distance_shift_bound(model: SageModel, g: Graph, expl: Explanation,
                         v: int, u: int) -> float:
    """Upper bound on how much the (v, u) embedding distance can move when the
    explanation's edges are removed, for a one-layer model:

        C_act * ||W_agg||_2 * (||delta_v||_2 + ||delta_u||_2)

    where delta_w is the change in w's mean neighbor-feature vector. The sum
    form follows from the triangle inequality plus the elementwise Lipschitz
    property of the activation; the tighter-looking ||delta_v - delta_u||
    variant fails for clipping activations because the nonlinearity acts at
    different pre-activation points for v and u.
    """
    if len(model.layers) != 1:
        raise ModelError("bound only holds for one-layer models")
    gp = perturb(g, expl)
    m0 = _neighbor_mean_of(g)
    m1 = _neighbor_mean_of(gp)
    delta_v = np.linalg.norm(m0[v] - m1[v])
    delta_u = np.linalg.norm(m0[u] - m1[u])
    spec = np.linalg.norm(model.layers[0][1], 2)
    return float(model.lipschitz_constant * spec * (delta_v + delta_u))

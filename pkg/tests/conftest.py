import numpy as np
import pytest

from cfknn.graph import Graph
from cfknn.sage import SageModel, init_model


def make_graph(num_nodes, edges, features=None, feature_dim=4, seed=None,
               labels=None):
    if features is None and seed is not None:
        rng = np.random.default_rng(seed)
        features = rng.standard_normal((num_nodes, feature_dim))
    return Graph.build(num_nodes, edges, features=features,
                       feature_dim=feature_dim, labels=labels)


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)], seed=0)


@pytest.fixture
def path3():
    return make_graph(3, [(0, 1), (1, 2)], seed=0)


@pytest.fixture
def star5():
    return make_graph(6, [(0, i) for i in range(1, 6)], seed=0)


# 5-node house: square 0-1-2-3 with roof 4 over 0 and 1
HOUSE_EDGES = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)]


@pytest.fixture
def house():
    return make_graph(5, HOUSE_EDGES, seed=0)


def random_graph(rng, n=10, p=0.35, feature_dim=4):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return make_graph(n, edges,
                      features=rng.standard_normal((n, feature_dim)))


def random_model(rng, feature_dim=4, hidden=6, layers=1, activation="relu"):
    return init_model(feature_dim, hidden, layers, activation,
                      seed=int(rng.integers(0, 2 ** 31)))


@pytest.fixture
def small_model():
    return init_model(4, 6, 1, "relu", seed=7)

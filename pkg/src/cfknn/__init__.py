"""Counterfactual subgraph explanations for unsupervised node embeddings."""

__version__ = "0.1.0"

from . import baselines, datasets, metrics, oracle  # noqa: F401
from .graph import Explanation, Graph, ego, perturb  # noqa: F401
from .knn import ImportanceEvaluator, LshIndex, importance, knn  # noqa: F401
from .mcts import ExplainerConfig, SearchResult, explain  # noqa: F401
from .sage import (Embedding, SageModel, TrainConfig, forward,  # noqa: F401
                   load_model, save_model, train_unsupervised)

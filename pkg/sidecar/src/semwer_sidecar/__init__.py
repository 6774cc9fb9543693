"""Semantic scorer sidecar: NLI entailment and embedding similarity over HTTP."""
from .app import SidecarConfig, create_app
from .scorers import HeuristicScorer, NeuralScorer, ScorerInfo, create_scorer

__all__ = [
    "HeuristicScorer",
    "NeuralScorer",
    "ScorerInfo",
    "SidecarConfig",
    "create_app",
    "create_scorer",
]

"""Mixed-membership estimation for networks with degree heterogeneity.

Pipeline: leading eigenvectors -> entrywise eigenvector ratios -> vertex
hunting in the ratio space -> barycentric membership reconstruction.
"""
__version__ = "0.1.0"

from .dcmm import DCMMParams, ExperimentConfig, omega, sample_adjacency, validate
from .evaluation import l2_error, run_experiment
from .exceptions import (DegenerateHullError, DisconnectedGraphError, MixedScoreError,
                         NoElbowError, ParseError, RadicandError, ValidationError)
from .graph import Graph, adjacency, giant_component, load_edge_list
from .membership import EstimateResult, ideal_mixed_score, mixed_score
from .spectral import EigenPairs, top_k_eigen

__all__ = [
    "DCMMParams", "ExperimentConfig", "omega", "sample_adjacency", "validate",
    "l2_error", "run_experiment",
    "DegenerateHullError", "DisconnectedGraphError", "MixedScoreError",
    "NoElbowError", "ParseError", "RadicandError", "ValidationError",
    "Graph", "adjacency", "giant_component", "load_edge_list",
    "EstimateResult", "ideal_mixed_score", "mixed_score",
    "EigenPairs", "top_k_eigen", "__version__",
]

"""Stable memory allocators over binary vectors.

Randomized maps {0,1}^n -> {0,1}^n that keep output weight stable, respect
input locality, and keep far-apart inputs distinguishable -- plus analytic
capacity/error bounds and a Monte Carlo harness that checks the two against
each other.
"""

from .alloc import (NetworkParams, NeuralAllocator, SelectFlipAllocator,
                    SmaParams, apply_neural, apply_select_flip,
                    compute_network_params, layer_forward, sample_neural,
                    sample_select_flip)
from .core import (BitVector, SeedPath, hamming_distance, random_bitvector,
                   random_pair_at_distance)
from .datadep import (InputSet, OrthogonalMap, search_orthogonal_map,
                      verify_map)
from .errors import (CapacityExceededError, NumericError, SearchFailure,
                     SmaError, UsageError)
from .mc import ExperimentConfig, StatSummary

__version__ = "0.1.0"

__all__ = [
    "BitVector", "SeedPath", "hamming_distance", "random_bitvector",
    "random_pair_at_distance",
    "SmaParams", "SelectFlipAllocator", "NeuralAllocator", "NetworkParams",
    "sample_select_flip", "apply_select_flip", "sample_neural",
    "apply_neural", "layer_forward", "compute_network_params",
    "InputSet", "OrthogonalMap", "search_orthogonal_map", "verify_map",
    "ExperimentConfig", "StatSummary",
    "SmaError", "UsageError", "CapacityExceededError", "NumericError",
    "SearchFailure",
    "__version__",
]

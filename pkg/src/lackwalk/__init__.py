"""Multi-self-loop lackadaisical quantum walk search on the hypercube."""

from lackwalk.hypercube import HypercubeDims, hamming_distance, is_adjacent, neighbor
from lackwalk.weights import CoinSpec, WeightScheme, compute_weight, make_coin_spec
from lackwalk.engine import (
    OracleSpec,
    WalkResult,
    apply_coin,
    apply_oracle,
    apply_shift,
    default_budget,
    initial_state,
    run_walk,
    step,
    success_probability,
)

__version__ = "0.1.0"

__all__ = [
    "CoinSpec",
    "HypercubeDims",
    "OracleSpec",
    "WalkResult",
    "WeightScheme",
    "apply_coin",
    "apply_oracle",
    "apply_shift",
    "compute_weight",
    "default_budget",
    "hamming_distance",
    "initial_state",
    "is_adjacent",
    "make_coin_spec",
    "neighbor",
    "run_walk",
    "step",
    "success_probability",
]

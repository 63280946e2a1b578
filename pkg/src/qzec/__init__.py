"""Certified lower bounds on the zero-error capacity of finite-dimensional quantum channels."""

from .capacity_search import (
    CapacityEstimate,
    SearchConfig,
    estimate_capacity,
    qubit_dichotomy,
    rate_for,
    verify_estimate,
)
from .channel_zoo import (
    ClassicalDmc,
    bitflip_channel,
    depolarizing_channel,
    embed_classical_dmc,
    identity_channel,
    pentagon_dmc,
    zoo_problem,
)
from .distinguishability import InputEnsemble, a_set, non_adjacent, orthogonal_outputs, transition_matrix
from .graph_engine import Graph, clique_number, disjunctive_product, graph_power
from .quantum_core import DensityOperator, KrausChannel, Povm, PureState, apply_channel, trace_distance

__version__ = "0.1.0"

"""LP relaxation and randomized rounding for list-restricted MaxQAP and MaxQbAP."""

from .bipartite import (
    Decomposition,
    FractionalMatching,
    WeightMatrix,
    birkhoff_decompose,
    max_weight_bmatching,
    max_weight_matching,
    random_perfect_matching,
    sample_from_decomposition,
)
from .instances import (
    BInstance,
    InstanceError,
    ListInstance,
    WeightedGraph,
    dump_instance,
    load_instance,
    obj_cross,
    obj_indicator,
    obj_pairs,
)
from .lp import FractionalSolution, LPModel, build_lp1, build_lp2, check_feasible, dump_lp, solve
from .oracle import ExactResult, exact_dup_maxqbap, exact_list_maxqap, exact_maxqbap, verify_halving
from .rounding import Partition, algorithm1, algorithm2, algorithm_b, algorithm_c, partition

__all__ = [
    "BInstance", "Decomposition", "ExactResult", "FractionalMatching", "FractionalSolution",
    "InstanceError", "LPModel", "ListInstance", "Partition", "WeightMatrix", "WeightedGraph",
    "algorithm1", "algorithm2", "algorithm_b", "algorithm_c", "birkhoff_decompose", "build_lp1",
    "build_lp2", "check_feasible", "dump_instance", "dump_lp", "exact_dup_maxqbap",
    "exact_list_maxqap", "exact_maxqbap", "load_instance", "max_weight_bmatching",
    "max_weight_matching", "obj_cross", "obj_indicator", "obj_pairs", "partition",
    "random_perfect_matching", "sample_from_decomposition", "solve", "verify_halving",
]

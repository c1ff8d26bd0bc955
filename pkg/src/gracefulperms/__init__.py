"""Exact enumeration, counting and lower-bound certification for
graceful permutations of paths."""

from .bounds import (
    BoundResult,
    build_witness,
    certify_bound,
    gamma,
    glue,
    integer_nth_root,
    is_bipartite_graceful,
    verify_inequality,
)
from .search import (
    ClassMap,
    ComputationRefused,
    Constraint,
    CountResult,
    EnumerationResult,
    GracefulPermutation,
    LevelStats,
    MultiplicityPair,
    OneEndpoint,
    TwoEndpoints,
    brute_force_count,
    count,
    dfs_count,
    enumerate_graceful,
    expand_level,
    finalize,
    is_graceful,
    root_map,
)
from .state import PartialState, add_edge, can_add_edge, candidate_pairs, new_root

__version__ = "0.1.0"

__all__ = [
    "BoundResult",
    "ClassMap",
    "ComputationRefused",
    "Constraint",
    "CountResult",
    "EnumerationResult",
    "GracefulPermutation",
    "LevelStats",
    "MultiplicityPair",
    "OneEndpoint",
    "PartialState",
    "TwoEndpoints",
    "add_edge",
    "brute_force_count",
    "build_witness",
    "can_add_edge",
    "candidate_pairs",
    "certify_bound",
    "count",
    "dfs_count",
    "enumerate_graceful",
    "expand_level",
    "finalize",
    "gamma",
    "glue",
    "integer_nth_root",
    "is_bipartite_graceful",
    "is_graceful",
    "new_root",
    "root_map",
    "verify_inequality",
]

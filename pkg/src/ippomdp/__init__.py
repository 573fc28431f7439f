"""Exact POMDP value iteration on alpha-vector sets via incremental pruning.

The library represents piecewise-linear convex value functions as sets of
alpha vectors and performs exact dynamic-programming updates by pruning cross
sums with linear programs.  Several pruning variants are provided, from the
plain formulation to one that restricts each LP to the neighbors of the
vectors involved, plus a brute-force oracle for certifying them all.
"""

from .dp import LP_MODES, VARIANTS, DpConfig, DpStats, dp_update
from .lp import (LinearProgram, LpError, LpOutcome, build_intersection_lp,
                 build_reformulated_lp, make_program, solve_lp)
from .model import (ModelError, ParseError, PomdpModel, StochasticityError,
                    belief_update, observation_prob, parse_pomdp,
                    serialize_pomdp, validate_belief)
from .neighbors import (NeighborGraph, detect_neighbors_in_union, full_graph,
                        inherit_affine, inherit_cross_sum, inherit_scaling)
from .oracle import (RandomModelSpec, brute_force_neighbors,
                     exhaustive_dp_update, grid_covering_check, random_pomdp,
                     simplex_grid)
from .pruning import (CspCallRecord, PruneStats, csp_neighbor, csp_plain,
                      csp_restricted_region, incremental_prune, lark_prune)
from .solver import (SolveConfig, SolveResult, bellman_residual,
                     extract_policy_action, initial_value_function,
                     lookahead_values, simulate, value_iterate)
from .vectorset import (AlphaVector, VectorSet, canonical_sort, cross_sum,
                        deduplicate, matrix_multiply,
                        pointwise_dominance_prune, read_alpha_file, value_at,
                        write_alpha_file)

__version__ = "0.1.0"

__all__ = [
    "AlphaVector", "VectorSet", "canonical_sort", "cross_sum", "deduplicate",
    "matrix_multiply", "pointwise_dominance_prune", "read_alpha_file",
    "value_at", "write_alpha_file",
    "PomdpModel", "ModelError", "ParseError", "StochasticityError",
    "parse_pomdp", "serialize_pomdp", "belief_update", "observation_prob",
    "validate_belief",
    "LinearProgram", "LpOutcome", "LpError", "make_program", "solve_lp",
    "build_intersection_lp", "build_reformulated_lp",
    "PruneStats", "CspCallRecord", "lark_prune", "csp_plain",
    "csp_restricted_region", "csp_neighbor", "incremental_prune",
    "NeighborGraph", "full_graph", "inherit_scaling", "inherit_affine",
    "inherit_cross_sum", "detect_neighbors_in_union",
    "DpConfig", "DpStats", "dp_update", "VARIANTS", "LP_MODES",
    "SolveConfig", "SolveResult", "value_iterate", "bellman_residual",
    "initial_value_function", "lookahead_values", "extract_policy_action",
    "simulate",
    "RandomModelSpec", "random_pomdp", "exhaustive_dp_update",
    "brute_force_neighbors", "simplex_grid", "grid_covering_check",
    "__version__",
]

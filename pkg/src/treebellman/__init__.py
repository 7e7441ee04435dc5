"""Sharp Bellman values of the maximal operator on trees.

The library computes the extremal (Bellman) values that govern the
p-th moment of the tree maximal operator under mean and moment
constraints — unrestricted and restricted to a measurable set — and
certifies them numerically from both sides: rearrangement-based upper
bounds checked on randomized trees, and explicit near-extremal
constructions for the lower bounds.
"""

from .battery import BatterySummary, random_profile, random_tree_function, run_battery
from .bellman import (
    BellmanQuery,
    FeasibleInterval,
    ThreeVarResult,
    bellman_three_var,
    bellman_two_var,
    feasible_interval,
    split_moment_floor,
    three_var_objective,
)
from .extremal import (
    CompositeBuild,
    ExtremalSpec,
    TargetUnreachedError,
    build_chain_extremizer,
    build_composite,
    certify_sharpness,
    power_law_exponent,
)
from .rearrange import (
    HardyAverage,
    QuadratureError,
    StepFunction1D,
    check_hardy_domination,
    check_holder_feasibility,
    check_moment_domination,
    check_subset_moment_bound,
    hardy_average,
    hardy_weighted_integral,
    integral_p,
    rearrange,
    rearrange_values,
)
from .report import VerificationReport
from .special import Exponent, as_exponent, h_poly, omega_p, u_func
from .trees import (
    MeasureSplit,
    SplitToleranceError,
    Tree,
    TreeFunction,
    binary_tree,
    build_tree,
    chain_tree,
    check_weak_type,
    maximal_operator,
    node_integrals,
    split_measure,
    tree_from_dict,
    tree_function_from_dict,
    tree_function_to_dict,
    tree_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "BatterySummary",
    "BellmanQuery",
    "CompositeBuild",
    "Exponent",
    "ExtremalSpec",
    "FeasibleInterval",
    "HardyAverage",
    "MeasureSplit",
    "QuadratureError",
    "SplitToleranceError",
    "StepFunction1D",
    "TargetUnreachedError",
    "ThreeVarResult",
    "Tree",
    "TreeFunction",
    "VerificationReport",
    "as_exponent",
    "bellman_three_var",
    "bellman_two_var",
    "binary_tree",
    "build_chain_extremizer",
    "build_composite",
    "build_tree",
    "certify_sharpness",
    "chain_tree",
    "check_hardy_domination",
    "check_holder_feasibility",
    "check_moment_domination",
    "check_subset_moment_bound",
    "check_weak_type",
    "feasible_interval",
    "h_poly",
    "hardy_average",
    "hardy_weighted_integral",
    "integral_p",
    "maximal_operator",
    "node_integrals",
    "omega_p",
    "power_law_exponent",
    "random_profile",
    "random_tree_function",
    "rearrange",
    "rearrange_values",
    "run_battery",
    "split_measure",
    "split_moment_floor",
    "three_var_objective",
    "tree_from_dict",
    "tree_function_from_dict",
    "tree_function_to_dict",
    "tree_to_dict",
    "u_func",
]

"""Online selection of items that occupy capacity for a limited time, under random arrivals."""

from .arrivals import (
    UNIFORM,
    ArrivalDistribution,
    quantile_gamma_bound,
    sample_arrivals,
    to_quantiles,
    trial_rng,
)
from .lp import (
    PackingLP,
    SolverError,
    enumerate_vertices,
    fractional_knapsack,
    greedy_round_up,
    randomized_round,
    solve_packing_lp,
)
from .model import (
    ArrivalRealization,
    Instance,
    Item,
    PackingConstraints,
    ScheduleState,
    is_feasible_now,
    load_instance,
    normalize_constraints,
    save_instance,
)
from .online import (
    AlgorithmParams,
    AlgorithmTrace,
    EpsilonClampWarning,
    LengthsScalingSelector,
    PackingScalingSelector,
    ScalingSelector,
    epsilon_default,
    run_algorithm,
    run_scaling_cardinality,
    run_scaling_lengths,
    run_scaling_packing,
)
from .oracles import (
    lp_relaxation_opt,
    opt_offline_exact,
    opt_star_cardinality,
    opt_star_lengths,
)

__version__ = "0.1.0"

__all__ = [
    "UNIFORM",
    "ArrivalDistribution",
    "quantile_gamma_bound",
    "sample_arrivals",
    "to_quantiles",
    "trial_rng",
    "PackingLP",
    "SolverError",
    "enumerate_vertices",
    "fractional_knapsack",
    "greedy_round_up",
    "randomized_round",
    "solve_packing_lp",
    "ArrivalRealization",
    "Instance",
    "Item",
    "PackingConstraints",
    "ScheduleState",
    "is_feasible_now",
    "load_instance",
    "normalize_constraints",
    "save_instance",
    "AlgorithmParams",
    "AlgorithmTrace",
    "EpsilonClampWarning",
    "LengthsScalingSelector",
    "PackingScalingSelector",
    "ScalingSelector",
    "epsilon_default",
    "run_algorithm",
    "run_scaling_cardinality",
    "run_scaling_lengths",
    "run_scaling_packing",
    "lp_relaxation_opt",
    "opt_offline_exact",
    "opt_star_cardinality",
    "opt_star_lengths",
]

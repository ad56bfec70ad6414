from .bounds import BoundResult, bounds_for, theoretical_bound
from .diagnostics import (
    block_feasibility_diagnostic,
    coupled_walk_diagnostic,
    packing_violation_diagnostic,
)
from .generators import GENERATORS, make_instance
from .harness import (
    COMPATIBLE_ORACLES,
    ConfigError,
    ExperimentConfig,
    ExperimentResult,
    TrialAggregate,
    aggregate,
    run_trials,
    summary_dict,
    trials_csv,
)

__all__ = [
    "BoundResult", "bounds_for", "theoretical_bound",
    "block_feasibility_diagnostic", "coupled_walk_diagnostic", "packing_violation_diagnostic",
    "GENERATORS", "make_instance",
    "COMPATIBLE_ORACLES", "ConfigError", "ExperimentConfig", "ExperimentResult",
    "TrialAggregate", "aggregate", "run_trials", "summary_dict", "trials_csv",
]

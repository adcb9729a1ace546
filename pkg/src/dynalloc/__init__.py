"""dynalloc: per-request dynamic computation allocation.

Treats serving capacity as a priced resource: each request takes the
action maximizing its expected gain minus the shadow price of the action's
cost, the price is solved by bisection so a pool spends exactly its
budget, and a PID-controlled cap on per-request cost keeps the system
stable through traffic spikes.
"""

from .allocator import ComputationAllocator
from .controller import (
    ControllerState,
    PidGains,
    SystemStatus,
    apply_maxpower,
    compute_error,
    control_step,
    pid_update,
)
from .core import (
    NO_ACTION,
    ActionSpace,
    AllocationProblem,
    AllocationSummary,
    AssumptionReport,
    dual_mu,
    dual_values,
    evaluate,
    select_action,
    select_actions,
    verify_assumptions,
)
from .gains import (
    AdScorePool,
    LinearGainModel,
    SyntheticGainParams,
    fit_linear,
    load_gain_model,
    monotonize_rows,
    save_gain_model,
    synthetic_gain,
    synthetic_rows,
    topk_pool_gain,
)
from .logio import (
    FeatureVector,
    LogRecord,
    emit_figure_data,
    generate_dataset,
    read_logs,
    write_logs,
)
from .oracle import WorkLimitExceeded, brute_force_mckp
from .simulator import (
    CapacityModel,
    PolicyMode,
    SimConfig,
    TickMetrics,
    TrafficSchedule,
    compare_policies,
    inject_spike,
    run_simulation,
)
from .solver import (
    SolverConfig,
    SolverResult,
    SweepPoint,
    adjust_budget,
    default_interval,
    lambda_sweep,
    sample_pool,
    solve_lambda,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSpace",
    "AdScorePool",
    "AllocationProblem",
    "AllocationSummary",
    "AssumptionReport",
    "CapacityModel",
    "ComputationAllocator",
    "ControllerState",
    "FeatureVector",
    "LinearGainModel",
    "LogRecord",
    "NO_ACTION",
    "PidGains",
    "PolicyMode",
    "SimConfig",
    "SolverConfig",
    "SolverResult",
    "SweepPoint",
    "SyntheticGainParams",
    "SystemStatus",
    "TickMetrics",
    "TrafficSchedule",
    "WorkLimitExceeded",
    "adjust_budget",
    "apply_maxpower",
    "brute_force_mckp",
    "compare_policies",
    "compute_error",
    "control_step",
    "default_interval",
    "dual_mu",
    "dual_values",
    "emit_figure_data",
    "evaluate",
    "fit_linear",
    "generate_dataset",
    "inject_spike",
    "lambda_sweep",
    "load_gain_model",
    "monotonize_rows",
    "pid_update",
    "read_logs",
    "run_simulation",
    "sample_pool",
    "save_gain_model",
    "select_action",
    "select_actions",
    "solve_lambda",
    "synthetic_gain",
    "synthetic_rows",
    "topk_pool_gain",
    "verify_assumptions",
    "write_logs",
]

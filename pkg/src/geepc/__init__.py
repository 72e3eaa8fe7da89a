"""Single-cell uplink power control for global energy efficiency.

Distributed update rules (GEE tracking, TPC, DTPC), a synchronous fixed-point
engine, closed-form feasibility analysis, a centralized Dinkelbach reference
solver with a brute-force oracle, and a seeded Monte Carlo experiment harness
with a CLI.
"""

from .backend import BACKEND, available_backends
from .exceptions import ConfigError, InfeasibleError, PowerControlError, SolverFailureError
from .feasibility import (
    feasibility_report,
    interference_load,
    is_feasible,
    max_common_target,
    power_for_targets,
)
from .iteration import (
    DynamicTracking,
    IterationConfig,
    IterationTrace,
    TargetSpec,
    TargetTracking,
    check_two_sided_scalable,
    default_opportunism,
    dtpc_update,
    gee_update,
    iterate,
    tpc_update,
)
from .model import (
    CellGeometry,
    LinkMetrics,
    NetworkSnapshot,
    RadioConstants,
    effective_interference,
    generate_snapshot,
    local_effective_interference,
    metrics,
    sinr,
)
from .solver import (
    OracleResult,
    ShareSolution,
    SolverOptions,
    brute_force_gee,
    compute_max_throughput,
    dinkelbach_solve,
    inner_maximize,
    refined_oracle,
    subtractive_gradient,
    subtractive_objective,
)

__version__ = "0.1.0"

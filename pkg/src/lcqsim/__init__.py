"""lcqsim: slotted-time Monte Carlo lab for max-weight downlink scheduling.

Simulates N-link ON/OFF and multi-rate downlinks under queue-aware and
queue-blind schedulers, computes the exact capacity-region quantities and
every closed-form backlog/delay bound, and ships the canned experiments
that exercise them.  The slot loop runs on a compiled kernel when the
extension is built, with a pure-Python fallback selected at import.
"""

from .bounds import (
    ArrivalMoments,
    BoundReport,
    KSelectors,
    arrival_moments,
    k_selectors,
    legacy_onoff_bound,
    multirate_bound,
    onoff_arbitrary_bound,
    onoff_balanced_bound,
)
from .capacity import (
    CapacityParams,
    ExactCheckUnavailable,
    LoadReport,
    f_balance_beta,
    max_rate_second_moment,
    mu_sym_k,
    multirate_mu_sym_lower,
    onoff_load,
    onoff_membership,
    r_k,
    scale_to_load,
)
from .experiments import (
    ResultRow,
    counterexample_system,
    emit_csv,
    evaluate_bounds,
    run_counterexample,
    run_fig1,
    run_fig2,
    run_scenario,
    sweep_n,
)
from .kernel import active_backend, compiled_available
from .model import (
    ArrivalModel,
    ChannelModel,
    QueueState,
    feasibility_check,
    sample_arrivals,
    sample_channels,
    step_queues,
)
from .scenario import Scenario, ScenarioError, parse_scenario, scenario_from_file
from .schedulers import (
    SchedulerKind,
    lcq_select,
    maxweight_multirate_select,
    modified_maxweight_select,
    random_connected_select,
    round_robin_select,
)
from .simulate import (
    DriftProbe,
    SimStats,
    batch_standard_error,
    drift_probe,
    little_delay,
    residual_split,
    run_simulation,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalModel",
    "ArrivalMoments",
    "BoundReport",
    "CapacityParams",
    "ChannelModel",
    "DriftProbe",
    "ExactCheckUnavailable",
    "KSelectors",
    "LoadReport",
    "QueueState",
    "ResultRow",
    "Scenario",
    "ScenarioError",
    "SchedulerKind",
    "SimStats",
    "active_backend",
    "arrival_moments",
    "batch_standard_error",
    "compiled_available",
    "counterexample_system",
    "drift_probe",
    "emit_csv",
    "evaluate_bounds",
    "f_balance_beta",
    "feasibility_check",
    "k_selectors",
    "lcq_select",
    "legacy_onoff_bound",
    "little_delay",
    "max_rate_second_moment",
    "maxweight_multirate_select",
    "modified_maxweight_select",
    "mu_sym_k",
    "multirate_bound",
    "multirate_mu_sym_lower",
    "onoff_arbitrary_bound",
    "onoff_balanced_bound",
    "onoff_load",
    "onoff_membership",
    "parse_scenario",
    "r_k",
    "random_connected_select",
    "residual_split",
    "round_robin_select",
    "run_counterexample",
    "run_fig1",
    "run_fig2",
    "run_scenario",
    "run_simulation",
    "sample_arrivals",
    "sample_channels",
    "scale_to_load",
    "scenario_from_file",
    "simulate",
    "step_queues",
    "sweep_n",
]

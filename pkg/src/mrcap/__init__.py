"""Joint admission control and capacity allocation for multi-class
MapReduce clusters: an exact centralized solver, a distributed
price-negotiation equivalent, integer rounding, and a seeded experiment
harness."""

from .centralized import (
    CentralizedReport,
    ClassAllocation,
    ContinuousAllocation,
    build_allocation,
    expand_solution,
    kkt_residual,
    solve_reduced,
)
from .class_manager import CmState, best_response, cm_objective, respond, update_bid
from .errors import (
    DeadlineInfeasibleError,
    InfeasibleError,
    InvalidBidError,
    InvalidParameterError,
    MrcapError,
    ProtocolViolationError,
)
from .game import (
    EquilibriumResult,
    IterationTrace,
    LoopConfig,
    convergence_metric,
    distributed_cost,
    estimate_distributed_time,
    run_best_reply,
)
from .generator import (
    CapacityRule,
    GeneratorConfig,
    ParameterRanges,
    apply_penalties,
    calibrate_penalties,
    generate,
    shrink,
)
from .io import load_instance, save_instance
from .model import (
    ClusterSpec,
    DerivedClassParams,
    EnergyInputs,
    JobClassSpec,
    PlannedClass,
    ProblemInstance,
    ValidationReport,
    compute_unit_cost,
    derive_class_params,
    predicted_time,
    validate_instance,
    validate_specs,
)
from .resource_manager import RmSolution, brute_force_rm, price_cap, rm_objective, solve_rm
from .rounding import (
    IntegerAllocation,
    IntegerClassAllocation,
    IntegerFeasibilityReport,
    check_integer_feasibility,
    round_solution,
)

__version__ = "0.1.0"

"""Signaling mechanisms, exact evaluators, and incentive checks for sequential
hiring with a committed sender and an adversarial candidate pool."""

from .core import (
    Action,
    Candidate,
    Instance,
    Knowledge,
    MechanismPolicy,
    ReceiverView,
    ScenarioSpec,
    SecsigError,
    SenderView,
    Signal,
    UtilityMode,
    best_candidates,
    instance_from_json,
    instance_to_json,
    load_instance,
    mu_receiver,
    normalize_for_mode,
    save_instance,
    validate_instance,
)
from .evaluate import (
    DPTable,
    EvalReport,
    PersuasivenessReport,
    approximation_ratio,
    benchmark_value,
    best_so_far_dp,
    check_persuasive,
    exact_evaluate,
    incentive_constraint_search,
)
from .lp import BoxLP, NestedLPPolicy, check_redundancy, nested_lp_policy, solve_box_lp
from .mechanisms import (
    BestSoFarTable,
    SampleSize,
    Selector,
    adaptive_elementary,
    best_so_far_mechanism,
    default_sample_size,
    dynkin,
    elementary,
    first_opt,
    growing_pareto,
    make_mechanism,
    nested_lp_mechanism,
    pareto_mechanism,
    shrinking_pareto,
    simple_secretary,
    trivial,
)
from .montecarlo import monte_carlo_evaluate
from .pareto import (
    FrontierPolyline,
    LPSolution,
    ParetoResult,
    opt_minus,
    pareto_procedure,
    solve_benchmark_lp,
    upper_convex_frontier,
)

__version__ = "0.1.0"

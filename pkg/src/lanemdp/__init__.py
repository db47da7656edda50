"""Lane-level stochastic routing: lane graphs, an MDP over lane changes and its solvers."""

from .lane_change import success_prob
from .lane_graph import (
    Cell,
    GraphFormatError,
    GraphValidationError,
    LaneGraph,
    ValidationReport,
    Violation,
    build,
    parse_graph,
    serialize_graph,
    validate,
)
from .mdp import Action, ActionKind, Outcome, SolveParams, enumerate_actions, outcomes, q_value
from .router import (
    MonotonicityPrecheckFailed,
    NonMonotoneError,
    Solution,
    SolveMode,
    SolveStats,
    UnknownGoalError,
    check_monotonicity_condition,
    find_children,
    solve,
)
from .vi import NoConvergenceError, VIConfig, value_iterate

__version__ = "0.1.0"

"""Exchange economies and inference from aggregate observations."""

from .allocations import (
    CnCheck,
    CnInstance,
    SplitNetwork,
    SplitSolution,
    cn_check,
    cn_membership,
    cnk_projection_bounds,
    split_network,
)
from .economy import Economy, aggregate_demand, check_assumption1, excess_demand, solve_equilibrium
from .inference import (
    ApproxEquilibriumSet,
    RobustBounds,
    TriState,
    approx_equilibrium_set,
    eq_revealed_demand_bounds,
    eq_revealed_preferred,
    grid_index,
    robust_bounds,
)

__all__ = [
    "ApproxEquilibriumSet",
    "CnCheck",
    "CnInstance",
    "Economy",
    "RobustBounds",
    "SplitNetwork",
    "SplitSolution",
    "TriState",
    "aggregate_demand",
    "approx_equilibrium_set",
    "check_assumption1",
    "cn_check",
    "cn_membership",
    "cnk_projection_bounds",
    "eq_revealed_demand_bounds",
    "eq_revealed_preferred",
    "excess_demand",
    "grid_index",
    "robust_bounds",
    "solve_equilibrium",
    "split_network",
]

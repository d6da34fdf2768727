"""Per-round placement and migration of jobs across data centers."""

from .model import (
    COST_EPS,
    FleetChangedError,
    InfeasibleRoundError,
    Migration,
    PlacementState,
    RoundDecision,
    SchedulerConfig,
    User,
    baseline_theta,
    cost,
    feasible_dcs,
    normalize_matrix,
    normalize_profiles,
)
from .solve import (
    InstanceTooLargeError,
    RoundInstance,
    brute_force_instance,
    brute_force_round,
    build_instance,
    solve_instance,
    solve_round,
)

__all__ = [
    "COST_EPS",
    "FleetChangedError",
    "InfeasibleRoundError",
    "InstanceTooLargeError",
    "Migration",
    "PlacementState",
    "RoundDecision",
    "RoundInstance",
    "SchedulerConfig",
    "User",
    "baseline_theta",
    "brute_force_instance",
    "brute_force_round",
    "build_instance",
    "cost",
    "feasible_dcs",
    "normalize_matrix",
    "normalize_profiles",
    "solve_instance",
    "solve_round",
]

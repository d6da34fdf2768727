from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..footprint import FACTORS, N_FACTORS, FootprintVector

# A deployed job whose current cost is at or below this is already optimal.
COST_EPS = 1e-9

CAPACITY_MODES = ("concurrent", "incoming")
NORMALIZATIONS = ("minmax", "none")
INFEASIBILITY_POLICIES = ("defer", "error")


class InfeasibleRoundError(RuntimeError):
    pass


class FleetChangedError(LookupError):
    """A deployed job points at a data center that is no longer in the fleet."""


@dataclass(frozen=True)
class User:
    user_id: str
    theta: Tuple[float, ...]

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        if len(theta) != N_FACTORS:
            raise ValueError(f"user {self.user_id!r}: theta needs {N_FACTORS} weights {FACTORS}, got {len(theta)}")
        if any(not t >= 0 or not np.isfinite(t) for t in theta):
            raise ValueError(f"user {self.user_id!r}: theta weights must be finite and >= 0, got {theta}")
        if not any(theta):
            raise ValueError(f"user {self.user_id!r}: theta must not be all zeros")
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class SchedulerConfig:
    alpha: float = 0.1
    capacity_mode: str = "concurrent"
    migration_enabled: bool = True
    normalization: str = "minmax"
    infeasibility_policy: str = "defer"

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha!r}")
        if self.capacity_mode not in CAPACITY_MODES:
            raise ValueError(f"capacity_mode must be one of {CAPACITY_MODES}, got {self.capacity_mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.infeasibility_policy not in INFEASIBILITY_POLICIES:
            raise ValueError(
                f"infeasibility_policy must be one of {INFEASIBILITY_POLICIES}, got {self.infeasibility_policy!r}"
            )


@dataclass(frozen=True)
class PlacementState:
    """Where every running job currently sits."""

    assignments: Mapping[Hashable, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))

    @property
    def occupancy(self) -> Dict[str, int]:
        return dict(Counter(self.assignments.values()))

    def check_capacity(self, s_max: Mapping[str, int]) -> None:
        for dc_id, count in self.occupancy.items():
            if count > s_max.get(dc_id, 0):
                raise InfeasibleRoundError(f"{count} jobs at {dc_id!r} exceed its capacity {s_max.get(dc_id, 0)}")


@dataclass(frozen=True)
class Migration:
    job_id: Hashable
    from_dc: str
    to_dc: str
    cost_before: float
    cost_after: float


@dataclass
class RoundDecision:
    placements: Dict[Hashable, str]
    migrations: List[Migration]
    deferred: List[Hashable]
    objective_value: float

    def next_state(self) -> PlacementState:
        return PlacementState(self.placements)


def baseline_theta(kind: str) -> Tuple[float, ...]:
    """One-hot preference on a single factor (CarbonOpt, WaterOpt, ...)."""
    if kind not in FACTORS:
        raise ValueError(f"unknown factor {kind!r}; expected one of {FACTORS}")
    return tuple(1.0 if f == kind else 0.0 for f in FACTORS)


def normalize_profiles(profiles: Mapping[str, FootprintVector], mode: str = "minmax") -> Dict[str, np.ndarray]:
    """Rescale each factor to [0, 1] across data centers (``minmax``) or leave as is.

    A factor with the same value everywhere maps to 0 for all data centers.
    """
    if not profiles:
        raise ValueError("need at least one profile")
    ids = list(profiles)
    raw = np.array([_as_array(profiles[i]) for i in ids], dtype=float)
    norm = normalize_matrix(raw, mode)
    return {i: norm[k] for k, i in enumerate(ids)}


def normalize_matrix(raw: np.ndarray, mode: str = "minmax") -> np.ndarray:
    if mode == "none":
        return raw.copy()
    if mode != "minmax":
        raise ValueError(f"unknown normalization {mode!r}")
    lo = raw.min(axis=0)
    span = raw.max(axis=0) - lo
    out = np.zeros_like(raw)
    ok = span > 0
    out[:, ok] = (raw[:, ok] - lo[ok]) / span[ok]
    return out


def _as_array(v) -> np.ndarray:
    return v.as_array() if isinstance(v, FootprintVector) else np.asarray(v, dtype=float)


def cost(job, dc_id: str, user: User, normalized_profiles: Mapping[str, np.ndarray]) -> float:
    """C(j, d): the data center's (normalized) profile weighted by the owner's preferences."""
    if job.owner != user.user_id:
        raise ValueError(f"job {job.job_id!r} is owned by {job.owner!r}, not {user.user_id!r}")
    return float(np.dot(_as_array(normalized_profiles[dc_id]), np.asarray(user.theta)))


def feasible_dcs(job, costs: Mapping[str, float], state: PlacementState, cfg: SchedulerConfig) -> set:
    """Data centers a job may be assigned to this round.

    New jobs may go anywhere. A running job may stay, or move only where its
    cost drops to at most ``(1 - alpha)`` of the current one.
    """
    d_prev = state.assignments.get(job.job_id, job.d_prev)
    if d_prev is None:
        return set(costs)
    if d_prev not in costs:
        raise FleetChangedError(f"job {job.job_id!r} is deployed at {d_prev!r}, which is not in the fleet")
    if not cfg.migration_enabled:
        return {d_prev}
    c_prev = costs[d_prev]
    if c_prev <= COST_EPS:
        return {d_prev}
    bound = (1.0 - cfg.alpha) * c_prev
    return {d_prev} | {d for d, c in costs.items() if c <= bound}

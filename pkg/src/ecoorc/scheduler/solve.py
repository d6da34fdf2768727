"""Exact per-round assignment and its brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Optional, Sequence

import numpy as np

from ..footprint import DataCenterProfile, Job, profile_matrix
from . import kernels
from .model import (
    COST_EPS,
    FleetChangedError,
    InfeasibleRoundError,
    Migration,
    PlacementState,
    RoundDecision,
    SchedulerConfig,
    User,
    normalize_matrix,
)

BRUTE_FORCE_LIMIT = 10**7
MAX_SCALE_EXP = 40


class InstanceTooLargeError(ValueError):
    pass


@dataclass
class RoundInstance:
    """Everything the kernels need for one round, with jobs and data centers indexed.

    Jobs are sorted by ``job_id`` and data centers by ``dc_id``; that order is
    also the tie-break order.
    """

    job_ids: List[Hashable]
    dc_ids: List[str]
    costs: np.ndarray  # (n_jobs, n_dcs) float
    feasible: np.ndarray  # (n_jobs, n_dcs) bool
    prev: np.ndarray  # (n_jobs,) dc index or -1
    cap: np.ndarray  # (n_dcs,)
    order: np.ndarray  # job indices, highest priority first
    incoming: bool
    policy: str = "defer"

    @property
    def qcost(self) -> np.ndarray:
        return quantize(self.costs)

    @classmethod
    def from_costs(
        cls,
        costs,
        s_max,
        prev=None,
        cfg: SchedulerConfig = SchedulerConfig(),
        arrival=None,
        job_ids=None,
        dc_ids=None,
    ) -> "RoundInstance":
        """Build an instance straight from a cost matrix, applying the migration trigger."""
        costs = np.asarray(costs, dtype=float)
        n, m = costs.shape
        job_ids = list(range(n)) if job_ids is None else list(job_ids)
        dc_ids = [f"dc{d:03d}" for d in range(m)] if dc_ids is None else list(dc_ids)
        prev = np.full(n, -1, np.int64) if prev is None else np.asarray(prev, np.int64)
        arrival = np.zeros(n, np.int64) if arrival is None else np.asarray(arrival)
        feasible = trigger_mask(costs, prev, cfg)
        return cls(
            job_ids=job_ids,
            dc_ids=dc_ids,
            costs=costs,
            feasible=feasible,
            prev=prev,
            cap=np.asarray(s_max, np.int64).reshape(m),
            order=priority_order(prev, arrival, job_ids),
            incoming=cfg.capacity_mode == "incoming",
            policy=cfg.infeasibility_policy,
        )

    def objective(self, assign: np.ndarray) -> float:
        return math.fsum(self.costs[j, d] for j, d in enumerate(assign) if d >= 0)


def trigger_mask(costs: np.ndarray, prev: np.ndarray, cfg: SchedulerConfig) -> np.ndarray:
    """Vectorized feasible sets: every row of a new job, restricted rows for running jobs."""
    n, m = costs.shape
    mask = np.ones((n, m), dtype=bool)
    for j in np.flatnonzero(prev >= 0):
        d_prev = prev[j]
        c_prev = costs[j, d_prev]
        if not cfg.migration_enabled or c_prev <= COST_EPS:
            mask[j] = False
        else:
            mask[j] = costs[j] <= (1.0 - cfg.alpha) * c_prev
        mask[j, d_prev] = True
    return mask


def priority_order(prev, arrival, job_ids) -> np.ndarray:
    """Running jobs first (by id), then waiting jobs first-come first-served."""
    keys = [
        (0, 0, jid) if p >= 0 else (1, int(a), jid)
        for p, a, jid in zip(prev, arrival, job_ids)
    ]
    return np.array(sorted(range(len(keys)), key=keys.__getitem__), dtype=np.int64)


def quantize(costs: np.ndarray) -> np.ndarray:
    """Map costs onto an integer grid fine enough to keep the objective within ~1e-11."""
    costs = np.asarray(costs, dtype=float)
    if costs.size == 0:
        return np.zeros(costs.shape, np.int64)
    if not np.all(np.isfinite(costs)) or costs.min() < 0:
        raise ValueError("costs must be finite and non-negative")
    n, m = costs.shape
    bound = max(float(costs.max()), 1.0) * (n + 1) * (n + m + 2)
    exp = min(MAX_SCALE_EXP, int(math.floor(60 - math.log2(bound))))
    return np.rint(np.ldexp(costs, exp)).astype(np.int64)


def solve_instance(inst: RoundInstance) -> np.ndarray:
    """Return the data-center index per job (``-1`` = deferred)."""
    n = len(inst.job_ids)
    if n == 0:
        return np.zeros(0, np.int64)
    assign, status, bad = kernels.ssp_assign(
        inst.qcost, inst.feasible, inst.prev, inst.cap, inst.order, inst.incoming
    )
    if status == kernels.DEPLOYED_UNROUTABLE:
        raise InfeasibleRoundError(f"running job {inst.job_ids[bad]!r} cannot be kept within capacity")
    _check_policy(inst, assign)
    return assign


def brute_force_instance(inst: RoundInstance, limit: int = BRUTE_FORCE_LIMIT) -> np.ndarray:
    n, m = inst.feasible.shape
    if n == 0:
        return np.zeros(0, np.int64)
    if float(m) ** n > limit:
        raise InstanceTooLargeError(f"{m}^{n} assignments exceed the enumeration limit {limit}")
    assign, found = kernels.enumerate_best(inst.qcost, inst.feasible, inst.prev, inst.cap, inst.order, inst.incoming)
    if not found:
        raise InfeasibleRoundError("no assignment keeps the running jobs within capacity")
    if np.any(assign[inst.prev >= 0] < 0):
        raise InfeasibleRoundError("running jobs cannot all be kept within capacity")
    _check_policy(inst, assign)
    return assign


def _check_policy(inst: RoundInstance, assign: np.ndarray) -> None:
    if inst.policy == "error" and np.any(assign < 0):
        left = [inst.job_ids[j] for j in np.flatnonzero(assign < 0)]
        raise InfeasibleRoundError(f"demand exceeds capacity; {len(left)} job(s) cannot be placed: {left}")


# -- job-level API -----------------------------------------------------------


def build_instance(
    jobs: Sequence[Job],
    dcs: Sequence[DataCenterProfile],
    users: Mapping[str, User],
    state: PlacementState,
    cfg: SchedulerConfig,
    profiles: Optional[np.ndarray] = None,
) -> RoundInstance:
    """Turn jobs and a fleet into a :class:`RoundInstance`.

    ``profiles`` may carry precomputed per-kWh profiles in fleet order.
    """
    if not isinstance(users, Mapping):
        users = {u.user_id: u for u in users}
    if profiles is None:
        profiles = profile_matrix(dcs)
    dc_order = sorted(range(len(dcs)), key=lambda i: dcs[i].dc_id)
    dc_ids = [dcs[i].dc_id for i in dc_order]
    if len(set(dc_ids)) != len(dc_ids):
        raise ValueError("duplicate dc_id in fleet")
    dc_index = {d: k for k, d in enumerate(dc_ids)}
    norm = normalize_matrix(np.asarray(profiles, dtype=float)[dc_order], cfg.normalization) if dcs else np.zeros((0, 4))

    jobs = sorted(jobs, key=lambda j: j.job_id)
    n, m = len(jobs), len(dc_ids)
    costs = np.zeros((n, m))
    prev = np.full(n, -1, np.int64)
    theta_cache: Dict[str, np.ndarray] = {}
    for k, job in enumerate(jobs):
        if job.owner not in users:
            raise KeyError(f"job {job.job_id!r} has unknown owner {job.owner!r}")
        if job.owner not in theta_cache:
            theta_cache[job.owner] = norm @ np.asarray(users[job.owner].theta)
        costs[k] = theta_cache[job.owner]
        d_prev = state.assignments.get(job.job_id, job.d_prev)
        if job.d_prev is not None and d_prev != job.d_prev:
            raise ValueError(f"job {job.job_id!r}: state says {d_prev!r}, job says {job.d_prev!r}")
        if d_prev is not None:
            if d_prev not in dc_index:
                raise FleetChangedError(f"job {job.job_id!r} is deployed at {d_prev!r}, which is not in the fleet")
            prev[k] = dc_index[d_prev]

    arrival = np.array([j.arrival_hour for j in jobs], dtype=np.int64)
    job_ids = [j.job_id for j in jobs]
    return RoundInstance(
        job_ids=job_ids,
        dc_ids=dc_ids,
        costs=costs,
        feasible=trigger_mask(costs, prev, cfg),
        prev=prev,
        cap=np.array([dcs[i].s_max for i in dc_order], dtype=np.int64),
        order=priority_order(prev, arrival, job_ids),
        incoming=cfg.capacity_mode == "incoming",
        policy=cfg.infeasibility_policy,
    )


def decision_from_assignment(inst: RoundInstance, assign: np.ndarray) -> RoundDecision:
    placements = {}
    migrations = []
    for j, d in enumerate(assign):
        if d < 0:
            continue
        jid = inst.job_ids[j]
        placements[jid] = inst.dc_ids[d]
        p = inst.prev[j]
        if p >= 0 and p != d:
            migrations.append(
                Migration(jid, inst.dc_ids[p], inst.dc_ids[d], float(inst.costs[j, p]), float(inst.costs[j, d]))
            )
    deferred = [inst.job_ids[j] for j in inst.order if assign[j] < 0]
    return RoundDecision(placements, migrations, deferred, inst.objective(assign))


def solve_round(jobs, dcs, users, state, cfg: SchedulerConfig, profiles=None) -> RoundDecision:
    inst = build_instance(jobs, dcs, users, state, cfg, profiles)
    return decision_from_assignment(inst, solve_instance(inst))


def brute_force_round(jobs, dcs, users, state, cfg: SchedulerConfig, profiles=None) -> RoundDecision:
    inst = build_instance(jobs, dcs, users, state, cfg, profiles)
    return decision_from_assignment(inst, brute_force_instance(inst))

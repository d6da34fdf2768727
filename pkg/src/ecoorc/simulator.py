"""Hour-by-hour orchestration loop over a fixed horizon.

Each round: retire finished jobs, refresh data-center profiles for the hour,
queue new arrivals, solve the placement problem, apply it, and charge every
running job's energy to the data center it sits in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .footprint import FACTORS, DataCenterProfile, FootprintVector, Job, footprint, profile_matrix
from .gridmix import StaticRegions
from .scheduler import PlacementState, RoundDecision, SchedulerConfig, User, baseline_theta, solve_round

log = logging.getLogger(__name__)

DEFAULT_START = datetime(2025, 5, 12, tzinfo=timezone.utc)

STRATEGY_LABELS = {
    "preference": "PreferenceBased",
    "carbon": "CarbonOpt",
    "water": "WaterOpt",
    "land": "LandUseOpt",
    "ewaste": "EWasteOpt",
}


@dataclass(frozen=True)
class Strategy:
    """Where job costs come from: owners' own preferences, or one factor for everyone.

    ``migration_enabled`` overrides the scheduler setting when not ``None``.
    """

    kind: str = "preference"
    migration_enabled: Optional[bool] = None

    def __post_init__(self):
        if self.kind != "preference" and self.kind not in FACTORS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected 'preference' or one of {FACTORS}")

    @property
    def name(self) -> str:
        if self.migration_enabled is None:
            return self.kind
        return f"{self.kind}/{'mig' if self.migration_enabled else 'nomig'}"

    @property
    def label(self) -> str:
        base = STRATEGY_LABELS[self.kind]
        if self.migration_enabled is None:
            return base
        return f"{base} ({'migration' if self.migration_enabled else 'no migration'})"

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        kind, _, mig = text.partition("/")
        if not mig:
            return cls(kind)
        if mig not in ("mig", "nomig"):
            raise ValueError(f"strategy suffix must be /mig or /nomig, got {text!r}")
        return cls(kind, mig == "mig")

    def users_for(self, users: Sequence[User]) -> Dict[str, User]:
        if self.kind == "preference":
            return {u.user_id: u for u in users}
        theta = baseline_theta(self.kind)
        return {u.user_id: User(u.user_id, theta) for u in users}


@dataclass(frozen=True)
class SimulationConfig:
    users: Tuple[User, ...]
    horizon_hours: int = 72
    dt_hours: int = 1
    lambda_per_hour: float = 10.0
    power_range_kw: Tuple[float, float] = (0.5, 10.0)
    lifetime_range_h: Tuple[int, int] = (1, 5)
    seed: int = 0
    strategy: Strategy = Strategy()
    start: datetime = DEFAULT_START

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        errs = []
        if self.horizon_hours < 1:
            errs.append("horizon_hours must be >= 1")
        if self.dt_hours < 1:
            errs.append("dt_hours must be >= 1")
        if not self.lambda_per_hour >= 0:
            errs.append("lambda_per_hour must be >= 0")
        lo, hi = self.power_range_kw
        if not 0 <= lo <= hi:
            errs.append(f"power_range_kw must satisfy 0 <= low <= high, got {self.power_range_kw}")
        lo, hi = self.lifetime_range_h
        if not 1 <= lo <= hi:
            errs.append(f"lifetime_range_h must satisfy 1 <= low <= high, got {self.lifetime_range_h}")
        if not self.users:
            errs.append("at least one user is required")
        if len({u.user_id for u in self.users}) != len(self.users):
            errs.append("user ids must be unique")
        if errs:
            raise ValueError("; ".join(errs))

    @property
    def n_rounds(self) -> int:
        return math.ceil(self.horizon_hours / self.dt_hours)


@dataclass
class RoundRecord:
    t_hour: int
    timestamp: datetime
    decision: RoundDecision
    dc_footprints: Dict[str, FootprintVector]
    total: FootprintVector
    active_jobs: int
    arrivals: int
    retired: int
    queued: int

    @property
    def migrations(self) -> int:
        return len(self.decision.migrations)

    @property
    def deferred(self) -> int:
        return len(self.decision.deferred)


@dataclass
class SimulationTrace:
    strategy: str
    seed: int
    rounds: List[RoundRecord] = field(default_factory=list)

    @property
    def cumulative(self) -> FootprintVector:
        acc = FootprintVector()
        for r in self.rounds:
            acc = acc + r.total
        return acc

    def series(self, factor: str) -> np.ndarray:
        return np.array([r.total[factor] for r in self.rounds])

    @property
    def total_migrations(self) -> int:
        return sum(r.migrations for r in self.rounds)


# -- workload -------------------------------------------------------------------


def generate_workload(cfg: SimulationConfig) -> List[Job]:
    """Poisson arrivals per hour with uniform power, lifetime and owner.

    PCG64 streams are spawned per purpose from ``cfg.seed`` (arrivals, powers,
    lifetimes, owners), so changing the user list leaves arrival times and
    job sizes untouched.
    """
    arrivals_ss, powers_ss, lifetimes_ss, owners_ss = np.random.SeedSequence(cfg.seed).spawn(4)
    counts = np.random.Generator(np.random.PCG64(arrivals_ss)).poisson(cfg.lambda_per_hour, size=cfg.horizon_hours)
    total = int(counts.sum())
    lo, hi = cfg.power_range_kw
    powers = np.random.Generator(np.random.PCG64(powers_ss)).uniform(lo, hi, size=total)
    lo, hi = cfg.lifetime_range_h
    lifetimes = np.random.Generator(np.random.PCG64(lifetimes_ss)).integers(lo, hi + 1, size=total)
    owners = np.random.Generator(np.random.PCG64(owners_ss)).integers(0, len(cfg.users), size=total)
    hours = np.repeat(np.arange(cfg.horizon_hours), counts)
    return [
        Job(
            job_id=k,
            owner=cfg.users[owners[k]].user_id,
            power_kw=float(powers[k]),
            lifetime_hours=int(lifetimes[k]),
            arrival_hour=int(hours[k]),
        )
        for k in range(total)
    ]


# -- fleet over time --------------------------------------------------------------


class FleetTimeline:
    """Fleet snapshots (data centers with their hour's region data) for every round."""

    def __init__(self, dcs: Sequence[DataCenterProfile], regions, cfg: SimulationConfig):
        if isinstance(regions, Mapping):
            regions = StaticRegions(regions)
        ids = [dc.dc_id for dc in dcs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate dc_id in fleet")
        missing = sorted({dc.region.region_id for dc in dcs if dc.region.region_id not in regions})
        if missing:
            raise KeyError(f"fleet references unknown regions: {missing}")
        self.snapshots: List[Tuple[List[DataCenterProfile], np.ndarray]] = []
        for r in range(cfg.n_rounds):
            ts = cfg.start + timedelta(hours=r * cfg.dt_hours)
            fleet = [dc.with_region(regions.region_at(dc.region.region_id, ts)) for dc in dcs]
            self.snapshots.append((fleet, profile_matrix(fleet)))


# -- main loop --------------------------------------------------------------------


def run_simulation(
    cfg: SimulationConfig,
    dcs: Sequence[DataCenterProfile],
    regions,
    scheduler_cfg: SchedulerConfig,
    workload: Optional[List[Job]] = None,
    timeline: Optional[FleetTimeline] = None,
) -> SimulationTrace:
    """Run one strategy over the horizon and return the per-round trace."""
    strategy = cfg.strategy
    if strategy.migration_enabled is not None:
        scheduler_cfg = SchedulerConfig(
            alpha=scheduler_cfg.alpha,
            capacity_mode=scheduler_cfg.capacity_mode,
            migration_enabled=strategy.migration_enabled,
            normalization=scheduler_cfg.normalization,
            infeasibility_policy=scheduler_cfg.infeasibility_policy,
        )
    if workload is None:
        workload = generate_workload(cfg)
    if timeline is None:
        timeline = FleetTimeline(dcs, regions, cfg)
    users = strategy.users_for(cfg.users)

    trace = SimulationTrace(strategy=strategy.name, seed=cfg.seed)
    pending = sorted(workload, key=lambda j: (j.arrival_hour, j.job_id))
    next_arrival = 0
    running: Dict[int, Job] = {}
    hours_done: Dict[int, int] = {}
    queue: List[Job] = []
    state = PlacementState()
    dt = cfg.dt_hours

    for r in range(cfg.n_rounds):
        t = r * dt
        ts = cfg.start + timedelta(hours=t)

        finished = [jid for jid, job in running.items() if hours_done[jid] >= job.lifetime_hours]
        for jid in finished:
            del running[jid]
            del hours_done[jid]
        if finished:
            state = PlacementState({k: v for k, v in state.assignments.items() if k in running})

        fleet, profiles = timeline.snapshots[r]

        arrivals = 0
        while next_arrival < len(pending) and pending[next_arrival].arrival_hour < t + dt:
            queue.append(pending[next_arrival])
            next_arrival += 1
            arrivals += 1
        queued = len(queue)

        decision = solve_round(list(running.values()) + queue, fleet, users, state, scheduler_cfg, profiles)

        waiting = {j.job_id: j for j in queue}
        for jid, dc_id in decision.placements.items():
            if jid in waiting:
                running[jid] = waiting.pop(jid).placed_at(dc_id)
                hours_done[jid] = 0
            else:
                running[jid] = running[jid].placed_at(dc_id)
        queue = [waiting[jid] for jid in decision.deferred]
        state = decision.next_state()

        energy: Dict[str, float] = {}
        for jid in sorted(running):
            job = running[jid]
            hrs = min(dt, job.lifetime_hours - hours_done[jid], cfg.horizon_hours - t)
            hours_done[jid] += hrs
            energy[job.d_prev] = energy.get(job.d_prev, 0.0) + job.power_kw * hrs
        dc_fp = {}
        total = FootprintVector()
        for dc in fleet:
            fp = footprint(energy.get(dc.dc_id, 0.0), dc)
            dc_fp[dc.dc_id] = fp
            total = total + fp

        trace.rounds.append(
            RoundRecord(
                t_hour=t,
                timestamp=ts,
                decision=decision,
                dc_footprints=dc_fp,
                total=total,
                active_jobs=len(running),
                arrivals=arrivals,
                retired=len(finished),
                queued=queued,
            )
        )
    log.debug("strategy %s seed %d: %d rounds, %d migrations", trace.strategy, cfg.seed, len(trace.rounds), trace.total_migrations)
    return trace


def run_comparison(
    cfg: SimulationConfig,
    dcs: Sequence[DataCenterProfile],
    regions,
    scheduler_cfg: SchedulerConfig,
    strategies: Sequence[Union[Strategy, str]],
    timeline: Optional[FleetTimeline] = None,
) -> Dict[str, SimulationTrace]:
    """Run several strategies on one shared workload.

    Results are keyed by strategy name; a repeated strategy gets ``#2``, ``#3``...
    """
    if not strategies:
        raise ValueError("need at least one strategy")
    strategies = [Strategy.parse(s) if isinstance(s, str) else s for s in strategies]
    workload = generate_workload(cfg)
    if timeline is None:
        timeline = FleetTimeline(dcs, regions, cfg)
    out = {}
    for strategy in strategies:
        run_cfg = SimulationConfig(**{**cfg.__dict__, "strategy": strategy})
        key, k = strategy.name, 1
        while key in out:
            k += 1
            key = f"{strategy.name}#{k}"
        try:
            out[key] = run_simulation(run_cfg, dcs, regions, scheduler_cfg, workload, timeline)
        except Exception as exc:
            raise RuntimeError(f"strategy {strategy.name!r} failed: {exc}") from exc
    return out

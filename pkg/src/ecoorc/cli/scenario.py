"""Scenario files: one TOML document describing fleet, regions, users and run settings.

Relative paths inside a scenario resolve against the scenario file's
directory. A ``bundled:`` prefix points into the package data directory.
``output_dir`` is the exception: it is taken relative to the working directory
so that bundled scenarios never write into the installed package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import tomli

from ..footprint import DataCenterProfile, RegionProfile
from ..gridmix import FixtureBackend, MixRegions, StaticMixBackend, StaticRegions, load_region_profiles, load_source_factors
from ..scheduler import SchedulerConfig, User
from ..simulator import DEFAULT_START, SimulationConfig, Strategy
from ..wue import parse_timestamp
from .datasets import DEFAULT_S_MAX, PROVIDERS, data_path, derive_profile, load_reported


class ScenarioError(ValueError):
    """Scenario could not be parsed or failed validation; ``problems`` lists every issue."""

    def __init__(self, path, problems: List[str]):
        self.path = path
        self.problems = list(problems)
        lines = "\n".join(f"  - {p}" for p in self.problems)
        super().__init__(f"{path}: {len(self.problems)} problem(s):\n{lines}")


@dataclass
class Scenario:
    name: str
    path: Path
    fleet: List[DataCenterProfile]
    regions: Any  # StaticRegions or MixRegions
    users: List[User]
    simulation: SimulationConfig
    scheduler: SchedulerConfig
    output_dir: Path
    warnings: List[str] = field(default_factory=list)

    @property
    def start(self) -> datetime:
        return self.simulation.start


def bundled_scenario(name: str) -> Path:
    return data_path("scenarios", f"{name}.toml")


def _resolve(base: Path, ref: str) -> Path:
    if ref.startswith("bundled:"):
        return data_path(*ref[len("bundled:"):].split("/"))
    p = Path(ref)
    return p if p.is_absolute() else base / p


def load_scenario(path, strict_missing: Optional[bool] = None) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        doc = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ScenarioError(path, [f"parse error: {exc}"]) from exc

    base = path.parent
    problems: List[str] = []
    notes: List[str] = []

    def section(name) -> Dict[str, Any]:
        value = doc.get(name, {})
        if not isinstance(value, dict):
            problems.append(f"[{name}] must be a table")
            return {}
        return value

    sim = section("simulation")
    sched = section("scheduler")
    grid = section("grid")
    fleet_opts = section("fleet")
    if strict_missing is None:
        strict_missing = bool(fleet_opts.get("strict_missing", False))
    default_s_max = fleet_opts.get("s_max", DEFAULT_S_MAX)

    try:
        start = parse_timestamp(str(doc["start"])) if "start" in doc else DEFAULT_START
    except ValueError as exc:
        problems.append(f"start: {exc}")
        start = DEFAULT_START

    # regions ---------------------------------------------------------------
    regions = None
    base_regions: Dict[str, RegionProfile] = {}
    for k, entry in enumerate(doc.get("regions", [])):
        try:
            region = RegionProfile.from_dict(entry)
        except (KeyError, TypeError, ValueError) as exc:
            problems.append(f"regions[{k}]: {exc}")
            continue
        if region.region_id in base_regions:
            problems.append(f"regions[{k}]: duplicate region_id {region.region_id!r}")
        base_regions[region.region_id] = region
    if grid:
        try:
            from_csv = load_region_profiles(_resolve(base, grid["regions"]))
            dup = sorted(set(from_csv) & set(base_regions))
            if dup:
                problems.append(f"grid.regions: region_id(s) also given inline: {dup}")
            base_regions.update(from_csv)
            factors = load_source_factors(_resolve(base, grid["factors"]))
            backend = FixtureBackend.from_csv(_resolve(base, grid["mixes"]))
            mode = grid.get("mode", "hourly")
            if mode == "static":
                backend = StaticMixBackend.from_fixture(backend, start)
            elif mode != "hourly":
                problems.append(f"grid.mode must be 'hourly' or 'static', got {mode!r}")
            regions = MixRegions(backend, factors, base_regions)
            for rid in sorted(base_regions):
                try:
                    base_regions[rid] = regions.region_at(rid, start)
                except (KeyError, LookupError, ValueError) as exc:
                    problems.append(f"grid: region {rid!r}: {exc}")
        except KeyError as exc:
            problems.append(f"[grid] is missing key {exc}")
        except (OSError, ValueError) as exc:
            problems.append(f"[grid]: {exc}")
    else:
        regions = StaticRegions(base_regions)
    if not base_regions:
        problems.append("no regions defined (use [[regions]] or [grid])")

    # fleet ---------------------------------------------------------------------
    fleet: List[DataCenterProfile] = []
    tables: Dict[str, Dict] = {}
    seen_ids = set()
    for k, entry in enumerate(doc.get("datacenters", [])):
        where = f"datacenters[{k}]"
        dc_id = entry.get("id")
        if not dc_id:
            problems.append(f"{where}: missing 'id'")
            continue
        where = f"datacenters[{k}] ({dc_id})"
        if dc_id in seen_ids:
            problems.append(f"{where}: duplicate id")
        seen_ids.add(dc_id)
        rid = entry.get("region")
        if rid not in base_regions:
            problems.append(f"{where}: unknown region {rid!r}")
            continue
        region = base_regions[rid]
        s_max = entry.get("s_max", default_s_max)
        try:
            if "source" in entry:
                provider = entry["source"]
                if provider not in PROVIDERS:
                    problems.append(f"{where}: unknown source {provider!r}; expected one of {PROVIDERS}")
                    continue
                if provider not in tables:
                    ref = section("reported").get(provider)
                    tables[provider] = load_reported(provider, _resolve(base, ref) if ref else None)
                location = entry.get("location")
                if location not in tables[provider]:
                    problems.append(f"{where}: location {location!r} not in the {provider} table")
                    continue
                dc = derive_profile(provider, tables[provider][location], dc_id, region, s_max)
            else:
                dc = DataCenterProfile(
                    dc_id=dc_id,
                    region=region,
                    pue=float(entry.get("pue", 1.0)),
                    wue=float(entry.get("wue", 0.0)),
                    p_onsite=float(entry.get("p_onsite", 0.0)),
                    ci_onsite=float(entry.get("ci_onsite", 0.0)),
                    ewif_onsite=float(entry.get("ewif_onsite", 0.0)),
                    area=_opt_float(entry.get("area")),
                    annual_it_energy=_opt_float(entry.get("annual_it_energy_kwh")),
                    ewi=float(entry.get("ewi", 0.0)),
                    s_max=s_max,
                )
        except (TypeError, ValueError) as exc:
            problems.append(f"{where}: {exc}")
            continue
        if not dc.has_land_data:
            msg = f"{where}: no land data; on-site land impact is taken as 0"
            if strict_missing:
                problems.append(msg)
            else:
                notes.append(msg)
        fleet.append(dc)
    if not doc.get("datacenters"):
        problems.append("no [[datacenters]] defined")

    # users ---------------------------------------------------------------------
    users: List[User] = []
    for k, entry in enumerate(doc.get("users", [])):
        try:
            users.append(User(str(entry["id"]), tuple(entry["theta"])))
        except KeyError as exc:
            problems.append(f"users[{k}]: missing {exc}")
        except (TypeError, ValueError) as exc:
            problems.append(f"users[{k}]: {exc}")
    if len({u.user_id for u in users}) != len(users):
        problems.append("users: duplicate id")
    if not users:
        problems.append("no [[users]] defined")

    # run settings -------------------------------------------------------------------
    scheduler = SchedulerConfig()
    try:
        scheduler = SchedulerConfig(
            alpha=float(sched.get("alpha", 0.1)),
            capacity_mode=sched.get("capacity_mode", "concurrent"),
            migration_enabled=bool(sched.get("migration_enabled", True)),
            normalization=sched.get("normalization", "minmax"),
            infeasibility_policy=sched.get("infeasibility_policy", "defer"),
        )
    except (TypeError, ValueError) as exc:
        problems.append(f"[scheduler]: {exc}")

    simulation = None
    if users:
        try:
            simulation = SimulationConfig(
                users=tuple(users),
                horizon_hours=int(sim.get("horizon_hours", 72)),
                dt_hours=int(sim.get("dt_hours", 1)),
                lambda_per_hour=float(sim.get("lambda_per_hour", 10.0)),
                power_range_kw=tuple(float(v) for v in sim.get("power_range_kw", (0.5, 10.0))),
                lifetime_range_h=tuple(int(v) for v in sim.get("lifetime_range_h", (1, 5))),
                seed=int(sim.get("seed", 0)),
                strategy=Strategy.parse(sim.get("strategy", "preference")),
                start=start,
            )
        except (TypeError, ValueError) as exc:
            problems.append(f"[simulation]: {exc}")

    if problems:
        raise ScenarioError(path, problems)
    for note in notes:
        warnings.warn(f"{path}: {note}", stacklevel=2)
    return Scenario(
        name=str(doc.get("name", path.stem)),
        path=path,
        fleet=fleet,
        regions=regions,
        users=users,
        simulation=simulation,
        scheduler=scheduler,
        output_dir=Path(doc.get("output_dir", "out")),
        warnings=notes,
    )


def _opt_float(v):
    return None if v is None else float(v)

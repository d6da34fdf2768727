"""Command line entry point: ``ecoorc simulate|compare|wue|profile``.

Every option can also come from an environment variable named
``ECOORC_<COMMAND>_<OPTION>``, e.g. ``ECOORC_SIMULATE_SEED=3``. Flags win.
"""

from __future__ import annotations

import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import numpy as np

from ..footprint import FACTOR_UNITS, FACTORS
from ..scheduler import SchedulerConfig
from ..simulator import FleetTimeline, SimulationTrace, Strategy, run_comparison, run_simulation
from ..wue import WueModelConfig, format_timestamp, hourly_wue_series, load_weather_csv, parse_timestamp, wet_bulb_f
from . import reports
from .scenario import Scenario, bundled_scenario, load_scenario
from .svg import Series, write_chart

log = logging.getLogger("ecoorc")

FACTOR_TITLES = {"carbon": "Carbon footprint", "water": "Water footprint", "land": "Land-use footprint", "ewaste": "E-waste footprint"}


class CommandError(click.ClickException):
    exit_code = 1


def _load(ref: str) -> Scenario:
    path = bundled_scenario(ref[len("bundled:"):]) if ref.startswith("bundled:") else Path(ref)
    if not path.exists():
        raise CommandError(f"scenario file not found: {path}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        scenario = load_scenario(path)
    for note in scenario.warnings:
        log.warning("%s", note)
    return scenario


def _with_alpha(cfg: SchedulerConfig, alpha: Optional[float], migrate: Optional[bool]) -> SchedulerConfig:
    return replace(
        cfg,
        alpha=cfg.alpha if alpha is None else alpha,
        migration_enabled=cfg.migration_enabled if migrate is None else migrate,
    )


def _config_echo(scenario: Scenario, scfg: SchedulerConfig) -> dict:
    sim = scenario.simulation
    return {
        "scenario": scenario.name,
        "datacenters": [dc.dc_id for dc in scenario.fleet],
        "users": {u.user_id: list(u.theta) for u in scenario.users},
        "horizon_hours": sim.horizon_hours,
        "dt_hours": sim.dt_hours,
        "lambda_per_hour": sim.lambda_per_hour,
        "power_range_kw": list(sim.power_range_kw),
        "lifetime_range_h": list(sim.lifetime_range_h),
        "start": format_timestamp(sim.start),
        "alpha": scfg.alpha,
        "capacity_mode": scfg.capacity_mode,
        "migration_enabled": scfg.migration_enabled,
        "normalization": scfg.normalization,
        "infeasibility_policy": scfg.infeasibility_policy,
    }


def _style(strategy: Strategy) -> str:
    return "dashed" if strategy.migration_enabled is False else "solid"


def _factor_charts(out: Path, prefix: str, curves: Dict[str, Tuple[np.ndarray, str]], hours, title_suffix: str = "") -> None:
    """``curves`` maps series label to (array of shape (rounds, 4), line style)."""
    for k, factor in enumerate(FACTORS):
        series = [Series(label, hours, arr[:, k], style=style) for label, (arr, style) in curves.items()]
        write_chart(
            out / f"{prefix}{factor}.svg",
            series,
            title=FACTOR_TITLES[factor] + title_suffix,
            xlabel="time (h)",
            ylabel=f"footprint per round ({FACTOR_UNITS[factor]})",
        )


def _trace_matrix(trace: SimulationTrace) -> np.ndarray:
    return np.array([r.total.as_array() for r in trace.rounds])


def _guard(fn):
    """Turn expected failures into a one-line message and exit status 1."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except (OSError, ValueError, LookupError, RuntimeError) as exc:
            raise CommandError(str(exc)) from exc

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@click.group(context_settings={"auto_envvar_prefix": "ECOORC", "show_default": True})
@click.option("-v", "--verbose", count=True, help="More logging (-vv for debug).")
def cli(verbose):
    """Sustainability-aware placement of jobs across data centers."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


_scenario_opt = click.option(
    "--scenario", required=True, help="Scenario TOML path, or bundled:meta / bundled:cloud."
)


@cli.command()
@_scenario_opt
@click.option("--strategy", default="preference", type=click.Choice(["preference", *FACTORS]))
@click.option("--seed", type=int, default=None, help="Workload seed (default: scenario's).")
@click.option("--alpha", type=float, default=None, help="Migration threshold (default: scenario's).")
@click.option("--migrate", type=bool, default=None, help="Allow migrations, true/false (default: scenario's).")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory (default: scenario's).")
@_guard
def simulate(scenario, strategy, seed, alpha, migrate, out):
    """Run one strategy and write rounds.csv, summary.json and per-factor charts."""
    sc = _load(scenario)
    scfg = _with_alpha(sc.scheduler, alpha, migrate)
    cfg = replace(sc.simulation, strategy=Strategy(strategy), seed=sc.simulation.seed if seed is None else seed)
    trace = run_simulation(cfg, sc.fleet, sc.regions, scfg)

    out = Path(out) if out else sc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    reports.write_rounds(trace, out / "rounds.csv")
    reports.write_json(reports.simulation_summary(trace, _config_echo(sc, scfg)), out / "summary.json")
    hours = [r.t_hour for r in trace.rounds]
    _factor_charts(out, "", {Strategy(strategy).label: (_trace_matrix(trace), "solid")}, hours)
    click.echo(f"wrote {out / 'rounds.csv'}, {out / 'summary.json'} and {len(FACTORS)} charts")


def _parse_seeds(seeds: Optional[str], n_seeds: Optional[int], default: int) -> List[int]:
    if seeds and n_seeds is not None:
        raise click.UsageError("give --seeds or --n-seeds, not both")
    if seeds:
        try:
            out = [int(s) for s in seeds.split(",") if s.strip()]
        except ValueError:
            raise click.BadParameter(f"not a comma-separated list of integers: {seeds!r}", param_hint="--seeds")
        if len(set(out)) != len(out):
            raise click.BadParameter("duplicate seed", param_hint="--seeds")
        return out
    if n_seeds is not None:
        if n_seeds < 1:
            raise click.BadParameter("must be >= 1", param_hint="--n-seeds")
        return list(range(n_seeds))
    return [default]


def _parse_strategies(text: str, migrate: str) -> List[Strategy]:
    kinds = [s.strip() for s in text.split(",") if s.strip()]
    if not kinds:
        raise click.BadParameter("empty list", param_hint="--strategies")
    out = []
    for kind in kinds:
        try:
            if migrate == "both":
                out += [Strategy(kind, True), Strategy(kind, False)]
            elif migrate == "scenario":
                out.append(Strategy(kind))
            else:
                out.append(Strategy(kind, migrate == "on"))
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--strategies")
    if len({s.name for s in out}) != len(out):
        raise click.BadParameter("duplicate strategy", param_hint="--strategies")
    return out


@cli.command()
@_scenario_opt
@click.option("--seeds", default=None, help="Comma-separated seeds, e.g. 0,1,2.")
@click.option("--n-seeds", type=int, default=None, help="Use seeds 0..N-1.")
@click.option("--strategies", default="preference,carbon,water,land", help="Comma-separated strategy kinds.")
@click.option(
    "--migrate",
    type=click.Choice(["scenario", "on", "off", "both"]),
    default="scenario",
    help="'both' runs every strategy with and without migration and adds a migration report.",
)
@click.option("--alpha", type=float, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@_guard
def compare(scenario, seeds, n_seeds, strategies, migrate, alpha, out):
    """Run several strategies on shared workloads and write comparison artifacts."""
    sc = _load(scenario)
    seed_list = _parse_seeds(seeds, n_seeds, sc.simulation.seed)
    strats = _parse_strategies(strategies, migrate)
    scfg = _with_alpha(sc.scheduler, alpha, None)
    timeline = FleetTimeline(sc.fleet, sc.regions, sc.simulation)

    runs: Dict[int, Dict[str, SimulationTrace]] = {}
    for seed in seed_list:
        cfg = replace(sc.simulation, seed=seed)
        runs[seed] = run_comparison(cfg, sc.fleet, sc.regions, scfg, strats, timeline=timeline)
        log.info("seed %d done", seed)

    out = Path(out) if out else sc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    reports.write_comparison(runs, out / "comparison.csv")
    summary = reports.comparison_summary(runs, {**_config_echo(sc, scfg), "strategies": [s.name for s in strats]})
    reports.write_json(summary, out / "summary.json")

    first = next(iter(runs.values()))
    hours = [r.t_hour for r in next(iter(first.values())).rounds]
    mean_curves = {s.name: np.mean([_trace_matrix(runs[seed][s.name]) for seed in seed_list], axis=0) for s in strats}
    by_name = {s.name: s for s in strats}
    _factor_charts(out, "compare_", {s.label: (mean_curves[s.name], _style(s)) for s in strats}, hours, " (mean over seeds)")

    if migrate == "both":
        report = reports.migration_report(summary)
        reports.write_json(report, out / "migration.json")
        for kind in report:
            pair = {by_name[n].label: (mean_curves[n], _style(by_name[n])) for n in (f"{kind}/mig", f"{kind}/nomig")}
            _factor_charts(out, f"migration_{kind}_", pair, hours, f", {Strategy(kind).label}")
    click.echo(f"wrote comparison of {len(strats)} strategies over {len(seed_list)} seed(s) to {out}")


@cli.command()
@click.option("--weather", required=True, type=click.Path(dir_okay=False), help="Hourly weather CSV.")
@click.option("--s", "cycles", type=float, default=10.0, help="Cycles of concentration.")
@click.option("--declared", type=float, default=None, help="Declared annual WUE to overlay (l/kWh).")
@click.option("--out", type=click.Path(file_okay=False), default="out/wue")
@_guard
def wue(weather, cycles, declared, out):
    """Estimate hourly WUE from weather and chart it against a declared value."""
    path = Path(weather)
    if not path.exists():
        raise CommandError(f"weather file not found: {path}")
    samples = load_weather_csv(path)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        series = hourly_wue_series(samples, WueModelConfig(s=cycles))
        tw = [float(wet_bulb_f(s)) for s in samples]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_wue(((format_timestamp(ts), t, w) for (ts, w), t in zip(series, tw)), out / "wue.csv")

    hours = [(ts - series[0][0]).total_seconds() / 3600 for ts, _ in series]
    chart = [Series("estimated hourly WUE", hours, [w for _, w in series], style="solid", color="#1f77b4")]
    if declared is not None:
        chart.append(Series("declared annual WUE", hours, [declared] * len(hours), style="dashed", color="#d62728"))
    chart.append(Series("wet-bulb temperature", hours, tw, style="dotted", color="#7f7f7f", right_axis=True))
    write_chart(out / "wue.svg", chart, title="Estimated vs declared WUE", xlabel="time (h)", ylabel="WUE (l/kWh)", y2label="wet-bulb (°F)")
    click.echo(f"wrote {len(series)} hourly values to {out / 'wue.csv'}")


@cli.command()
@_scenario_opt
@click.option("--at", default=None, help="RFC 3339 hour to evaluate hourly grid data at (default: scenario start).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@_guard
def profile(scenario, at, out):
    """Write per-kWh sustainability profiles and a per-factor ranking."""
    sc = _load(scenario)
    fleet = sc.fleet
    if at is not None:
        ts = parse_timestamp(at)
        fleet = [dc.with_region(sc.regions.region_at(dc.region.region_id, ts)) for dc in fleet]
    out = Path(out) if out else sc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    reports.write_profiles(fleet, out / "profiles.csv")
    reports.write_ranking(fleet, out / "ranking.csv")
    click.echo(f"wrote profiles of {len(fleet)} data centers to {out}")


def main():  # pragma: no cover
    cli()


if __name__ == "__main__":  # pragma: no cover
    main()

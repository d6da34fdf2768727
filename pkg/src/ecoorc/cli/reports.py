"""CSV and JSON artifacts, plus the readers that parse them back.

Floats are written with ``repr``, the shortest decimal string that round-trips
to the same double, so equal runs give equal bytes.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from ..footprint import FACTORS, DataCenterProfile, per_kwh_profile
from ..simulator import SimulationTrace

FOOTPRINT_COLUMNS = ("carbon_g", "water_l", "land_g", "ewaste_g")
ROUND_COLUMNS = ("t_hour", "strategy", *FOOTPRINT_COLUMNS, "active_jobs", "migrations", "deferred")
COMPARISON_COLUMNS = ("seed", *ROUND_COLUMNS)
PROFILE_COLUMNS = ("dc_id", "region_id", *FOOTPRINT_COLUMNS)
RANKING_COLUMNS = ("factor", "rank", "dc_id", "value")
WUE_COLUMNS = ("timestamp_utc", "wet_bulb_f", "wue_l_per_kwh")

_INT_FIELDS = {"t_hour", "active_jobs", "migrations", "deferred", "seed", "rank"}
_STR_FIELDS = {"strategy", "dc_id", "region_id", "factor", "timestamp_utc"}


def fmt(x: float) -> str:
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _round_rows(trace: SimulationTrace):
    for r in trace.rounds:
        yield [r.t_hour, trace.strategy, *(fmt(v) for v in r.total.as_array()), r.active_jobs, r.migrations, r.deferred]


def write_rounds(trace: SimulationTrace, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(ROUND_COLUMNS)
        w.writerows(_round_rows(trace))


def write_comparison(runs: Mapping[int, Mapping[str, SimulationTrace]], path) -> None:
    """``runs`` maps seed to {strategy name: trace}."""
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(COMPARISON_COLUMNS)
        for seed in sorted(runs):
            for trace in runs[seed].values():
                for row in _round_rows(trace):
                    w.writerow([seed, *row])


def read_table(path) -> List[Dict[str, object]]:
    """Parse any CSV written by this module back into typed rows."""
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            typed = {}
            for k, v in row.items():
                if k in _INT_FIELDS:
                    typed[k] = int(v)
                elif k in _STR_FIELDS:
                    typed[k] = v
                else:
                    typed[k] = float(v)
            out.append(typed)
    return out


read_rounds = read_table
read_comparison = read_table


def column_totals(rows: Iterable[Mapping[str, object]]) -> Dict[str, float]:
    rows = list(rows)
    return {c: math.fsum(float(r[c]) for r in rows) for c in FOOTPRINT_COLUMNS}


def _totals(trace: SimulationTrace) -> Dict[str, float]:
    return dict(zip(FOOTPRINT_COLUMNS, (float(v) for v in trace.cumulative.as_array())))


def simulation_summary(trace: SimulationTrace, config: Mapping[str, object]) -> dict:
    return {
        "seed": trace.seed,
        "strategy": trace.strategy,
        "rounds": len(trace.rounds),
        "cumulative": _totals(trace),
        "migrations": trace.total_migrations,
        "deferred": sum(r.deferred for r in trace.rounds),
        "config": dict(config),
    }


def comparison_summary(runs: Mapping[int, Mapping[str, SimulationTrace]], config: Mapping[str, object]) -> dict:
    seeds = sorted(runs)
    names = list(next(iter(runs.values())).keys()) if runs else []
    per_strategy = {}
    for name in names:
        per_seed = [_totals(runs[s][name]) for s in seeds]
        per_strategy[name] = {
            "mean_cumulative": {c: math.fsum(p[c] for p in per_seed) / len(per_seed) for c in FOOTPRINT_COLUMNS},
            "per_seed": {str(s): p for s, p in zip(seeds, per_seed)},
            "migrations": sum(runs[s][name].total_migrations for s in seeds),
        }
    return {"seeds": seeds, "strategies": per_strategy, "config": dict(config)}


def migration_report(summary: dict) -> Dict[str, dict]:
    """Pair ``kind/mig`` with ``kind/nomig`` and report the change in each factor."""
    strategies = summary["strategies"]
    out = {}
    for name in sorted(strategies):
        if not name.endswith("/mig"):
            continue
        kind = name[: -len("/mig")]
        other = f"{kind}/nomig"
        if other not in strategies:
            continue
        with_m = strategies[name]["mean_cumulative"]
        without = strategies[other]["mean_cumulative"]
        out[kind] = {
            c: {
                "with_migration": with_m[c],
                "without_migration": without[c],
                "relative_change": (with_m[c] - without[c]) / without[c] if without[c] else 0.0,
            }
            for c in FOOTPRINT_COLUMNS
        }
    return out


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


# -- profiles ---------------------------------------------------------------------


def profile_rows(fleet: Sequence[DataCenterProfile]) -> List[Tuple[str, str, Tuple[float, ...]]]:
    return [(dc.dc_id, dc.region.region_id, tuple(per_kwh_profile(dc).as_array())) for dc in fleet]


def write_profiles(fleet: Sequence[DataCenterProfile], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(PROFILE_COLUMNS)
        for dc_id, rid, vals in profile_rows(fleet):
            w.writerow([dc_id, rid, *(fmt(v) for v in vals)])


def ranking(fleet: Sequence[DataCenterProfile]) -> Dict[str, List[Tuple[str, float]]]:
    """Data centers per factor, best (lowest per-kWh impact) first; ties by dc_id."""
    rows = profile_rows(fleet)
    return {f: sorted(((dc_id, vals[k]) for dc_id, _, vals in rows), key=lambda p: (p[1], p[0])) for k, f in enumerate(FACTORS)}


def write_ranking(fleet: Sequence[DataCenterProfile], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(RANKING_COLUMNS)
        for factor, entries in ranking(fleet).items():
            for k, (dc_id, value) in enumerate(entries, start=1):
                w.writerow([factor, k, dc_id, fmt(value)])


def write_wue(rows: Iterable[Tuple[str, float, float]], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = _writer(fh)
        w.writerow(WUE_COLUMNS)
        for ts, tw, wue in rows:
            w.writerow([ts, fmt(tw), fmt(wue)])

import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import settings

from ecoorc.cli.scenario import bundled_scenario, load_scenario
from ecoorc.footprint import DataCenterProfile, RegionProfile
from ecoorc.simulator import FleetTimeline, run_comparison

settings.register_profile("default", max_examples=1000, deadline=None)
settings.load_profile("default")

N_SEEDS = 10
COMPARE_STRATEGIES = (
    "preference",
    "carbon/mig",
    "water/mig",
    "land/mig",
    "carbon/nomig",
    "water/nomig",
    "land/nomig",
)


def make_dc(dc_id="dc", region_id="R", s_max=5, **kw):
    region_fields = {k: kw.pop(k) for k in ("ci_grid", "ewif_grid", "elif_grid", "wsf", "cclf") if k in kw}
    region = RegionProfile(region_id, **region_fields)
    return DataCenterProfile(dc_id=dc_id, region=region, s_max=s_max, **kw)


@pytest.fixture(scope="session")
def scenarios():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return {name: load_scenario(bundled_scenario(name)) for name in ("meta", "cloud")}


@pytest.fixture(scope="session")
def comparison_runs(scenarios):
    """{scenario: {seed: {strategy: trace}}} plus per-run wall times, computed once."""
    import time

    out, timings = {}, []
    for name, sc in scenarios.items():
        timeline = FleetTimeline(sc.fleet, sc.regions, sc.simulation)
        out[name] = {}
        for seed in range(N_SEEDS):
            cfg = replace(sc.simulation, seed=seed)
            t0 = time.perf_counter()
            out[name][seed] = run_comparison(cfg, sc.fleet, sc.regions, sc.scheduler, COMPARE_STRATEGIES, timeline=timeline)
            timings.append((time.perf_counter() - t0) / len(COMPARE_STRATEGIES))
    return out, timings


def mean_cumulative(runs, strategy):
    return np.mean([runs[seed][strategy].cumulative.as_array() for seed in runs], axis=0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

"""Regenerate the bundled fixture files under src/ecoorc/data.

Reported provider tables are transcribed by hand below. Regional grid mixes
and weather are synthetic: a fixed base mix per region with a diurnal solar
curve and a seeded wind walk, and sinusoidal temperature/dew point. Rerunning
this script reproduces the committed files byte for byte.
"""

import csv
import math
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from ecoorc.gridmix import SourceMix, write_mix_csv
from ecoorc.wue import c_to_f, relative_humidity, stull_wet_bulb_c

DATA = Path(__file__).resolve().parents[1] / "src" / "ecoorc" / "data"
START = datetime(2025, 5, 12, tzinfo=timezone.utc)
HOURS = 72

AZURE = [
    # location, pue, wue l/kWh, land m2, note
    ("Arizona", 1.223, 2.24, 22730, ""),
    ("Illinois", 1.346, 0.79, 65032, ""),
    ("Iowa", 1.16, 0.19, 37904, ""),
    ("Texas", 1.307, 1.82, 43664, ""),
    ("Washington", 1.156, 1.09, 74322, "WUE 2021"),
    ("Wyoming", 1.125, 0.23, None, ""),
    ("Ireland", 1.197, 0.03, 28149, "PUE and WUE 2021"),
    ("Italy", 1.12, 0.023, None, ""),
    ("Netherlands", 1.158, 0.08, None, ""),
    ("Sweden", 1.172, 0.16, None, ""),
    ("Singapore", 1.358, 2.06, 32516, ""),
]

GOOGLE = [
    # location, pue, water withdrawal Ml, land m2
    ("Alabama", 1.1, 604.91, 25084),
    ("Georgia", 1.09, 1585.33, 120774),
    ("Nebraska", 1.09, 621.56, None),
    ("Nevada (Henderson)", 1.08, 1036.45, 6968),
    ("Nevada (Storey County)", 1.19, 7.19, None),
    ("North Carolina", 1.09, 1355.56, 31308),
    ("Ohio", 1.1, 575.38, 25548),
    ("Oklahoma", 1.1, 3925.85, 130064),
    ("Oregon", 1.07, 726.23, None),
    ("Texas", 1.13, 621.94, 74322),
    ("South Carolina", 1.1, 3206.99, None),
    ("Tennessee", 1.1, 1294.61, None),
    ("Chile", 1.09, 721.88, None),
    ("Belgium", 1.09, 1320.73, 83613),
    ("Denmark", 1.1, 102.21, 13471),
    ("Finland", 1.09, 11.36, 16000),
    ("Ireland", 1.08, 2.27, 28800),
    ("Netherlands", 1.08, 1121.99, None),
]

AWS = [
    # location, pue, land m2
    ("Canada", 1.22, None),
    ("California", 1.17, 3326),
    ("Northern Virginia", 1.15, None),
    ("Ohio", 1.12, 102007),
    ("Oregon", 1.13, None),
    ("Brasil", 1.18, None),
    ("Ireland", 1.1, 2159),
    ("Sweden", 1.12, 13471),
    ("Germany", 1.33, None),
    ("Spain", 1.11, None),
    ("South Africa", 1.24, None),
    ("Bahrain", 1.32, None),
    ("UAE", 1.36, None),
    ("India (Hyderabad)", 1.5, None),
    ("India (Mumbai)", 1.44, None),
    ("China", 1.26, None),
    ("Singapore", 1.3, None),
    ("Indonesia", 1.35, None),
    ("Japan", 1.32, None),
    ("Australia (Melbourne)", 1.08, None),
    ("Australia (Sydney)", 1.15, 21367.69),
]

META = [
    # location, facility consumption MWh, water withdrawal Ml, land m2
    ("Alabama", 614198, 152, 90116),
    ("Georgia", 968565, 61, None),
    ("Illinois", 138965, 55, None),
    ("Iowa", 1243306, 173, 133780),
    ("Nebraska", 1148091, 123, 2415478),
    ("New Mexico", 1110100, 283, 37161),
    ("North Carolina", 507068, 55, 68748),
    ("Ohio", 793063, 72, 55742),
    ("Oregon", 1375321, 180, 297290),
    ("Tennessee", 116520, 3, None),
    ("Texas", 1029570, 404, 2043866),
    ("Utah", 787740, 87, 90116),
    ("Virginia", 805061, 42, 41806),
    ("Denmark", 518005, 371, 25084),
    ("Ireland", 953837, 659, 86000),
    ("Sweden", 351931, 50, 92903),
]

# Approximate lifecycle intensities per generation source. "other" is left out
# on purpose; it falls back to the mix mean.
SOURCE_FACTORS = [
    # source, g CO2/kWh, l/kWh, m2/kWh
    ("biomass", 230.0, 2.2, 0.058),
    ("coal", 820.0, 2.6, 0.015),
    ("gas", 490.0, 0.75, 0.001),
    ("geothermal", 38.0, 2.7, 0.0023),
    ("hydro", 24.0, 5.4, 0.014),
    ("nuclear", 12.0, 2.5, 0.0003),
    ("oil", 650.0, 1.6, 0.002),
    ("solar", 41.0, 0.1, 0.019),
    ("wind", 11.0, 0.0, 0.0004),
]

# region: (utc offset h, wsf, cclf g CO2/m2/yr, base mix)
REGIONS = {
    "US-AL": (-5, 0.10, 650.0, {"gas": .40, "nuclear": .30, "coal": .18, "hydro": .07, "solar": .03, "biomass": .02}),
    "US-AZ": (-7, 1.20, 50.0, {"gas": .42, "nuclear": .28, "coal": .12, "solar": .13, "hydro": .05}),
    "US-GA": (-4, 0.12, 700.0, {"gas": .42, "nuclear": .27, "coal": .14, "solar": .08, "hydro": .03, "biomass": .06}),
    "US-IA": (-5, 0.08, 250.0, {"wind": .60, "coal": .24, "gas": .10, "solar": .02, "hydro": .02, "other": .02}),
    "US-NE": (-5, 0.20, 150.0, {"coal": .48, "wind": .30, "nuclear": .14, "gas": .03, "hydro": .04, "solar": .01}),
    "US-NM": (-6, 0.90, 60.0, {"gas": .35, "wind": .30, "coal": .20, "solar": .14, "other": .01}),
    "US-NC": (-4, 0.10, 600.0, {"gas": .34, "nuclear": .32, "coal": .13, "solar": .11, "hydro": .05, "biomass": .05}),
    "US-OH": (-4, 0.09, 350.0, {"gas": .50, "coal": .28, "nuclear": .15, "wind": .03, "solar": .02, "other": .02}),
    "US-OK": (-5, 0.25, 180.0, {"gas": .45, "wind": .43, "coal": .09, "hydro": .03}),
    "US-OR": (-7, 0.07, 800.0, {"hydro": .45, "gas": .28, "wind": .15, "solar": .05, "biomass": .03, "coal": .02, "other": .02}),
    "US-TX": (-5, 0.45, 200.0, {"gas": .46, "wind": .26, "coal": .14, "nuclear": .08, "solar": .06}),
    "US-UT": (-6, 0.70, 80.0, {"coal": .55, "gas": .28, "solar": .11, "wind": .03, "hydro": .02, "geothermal": .01}),
    "US-VA": (-4, 0.08, 550.0, {"gas": .56, "nuclear": .30, "solar": .06, "coal": .03, "biomass": .03, "hydro": .02}),
    "BE": (2, 0.30, 320.0, {"nuclear": .41, "gas": .26, "wind": .18, "solar": .09, "biomass": .05, "other": .01}),
    "DK": (2, 0.10, 350.0, {"wind": .55, "biomass": .20, "solar": .10, "coal": .08, "gas": .05, "other": .02}),
    "IE": (1, 0.02, 300.0, {"gas": .45, "wind": .38, "coal": .03, "oil": .04, "solar": .02, "hydro": .02, "biomass": .02, "other": .04}),
    "SE": (2, 0.01, 450.0, {"hydro": .42, "nuclear": .30, "wind": .20, "biomass": .06, "solar": .02}),
}

DISPATCHABLE = ("gas", "coal", "oil")


def _write(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else v for v in row])


def reported_tables():
    _write(DATA / "reported" / "azure.csv", ["location", "pue", "wue_l_per_kwh", "land_m2", "note"], AZURE)
    _write(DATA / "reported" / "google.csv", ["location", "pue", "water_withdrawal_ml", "land_m2"], GOOGLE)
    _write(DATA / "reported" / "aws.csv", ["location", "pue", "land_m2"], AWS)
    _write(DATA / "reported" / "meta.csv", ["location", "facility_mwh", "water_withdrawal_ml", "land_m2"], META)


def grid_fixtures():
    _write(DATA / "grid" / "source_factors.csv", ["source", "ci_g_per_kwh", "water_l_per_kwh", "land_m2_per_kwh"], SOURCE_FACTORS)
    _write(
        DATA / "grid" / "regions.csv",
        ["region_id", "wsf", "cclf"],
        [(r, wsf, cclf) for r, (_, wsf, cclf, _) in sorted(REGIONS.items())],
    )
    rng = np.random.default_rng(20250512)
    rows = []
    for region, (offset, _, _, base) in sorted(REGIONS.items()):
        wind_level = 1.0
        for h in range(HOURS):
            ts = START + timedelta(hours=h)
            local = (h + offset) % 24
            sun = max(0.0, math.sin(math.pi * (local - 6) / 12)) * 1.6
            wind_level = float(np.clip(0.8 * wind_level + 0.2 + rng.normal(0, 0.15), 0.3, 1.7))
            shares = dict(base)
            if "solar" in shares:
                shares["solar"] = base["solar"] * sun
            if "wind" in shares:
                shares["wind"] = base["wind"] * wind_level
            # dispatchable plants absorb the renewable swing
            gap = 1.0 - sum(shares.values())
            disp = [s for s in DISPATCHABLE if s in shares]
            disp_total = sum(shares[s] for s in disp)
            for s in disp:
                shares[s] = max(0.0, shares[s] + gap * shares[s] / disp_total)
            total = sum(shares.values())
            shares = {k: round(v / total, 6) for k, v in shares.items() if v > 0}
            top = max(shares, key=shares.get)
            shares[top] = round(shares[top] + 1.0 - sum(shares.values()), 6)
            rows.append((ts, SourceMix(region, shares)))
    write_mix_csv(rows, DATA / "grid" / "mixes.csv")


def _weather(path, t_mean, t_amp, dew_mean, dew_amp, offset, seed):
    rng = np.random.default_rng(seed)
    rows = []
    for h in range(HOURS):
        local = (h + offset) % 24
        phase = math.cos(math.pi * (local - 15) / 12)
        temp = t_mean + t_amp * phase + rng.normal(0, 0.4)
        dew = min(temp - 0.5, dew_mean + dew_amp * phase + rng.normal(0, 0.3))
        rows.append(((START + timedelta(hours=h)).strftime("%Y-%m-%dT%H:%M:%SZ"), f"{temp:.2f}", f"{dew:.2f}"))
    _write(path, ["timestamp_utc", "temp_c", "dewpoint_c"], rows)


def _dewpoint_for_wet_bulb(temp_c, target_f):
    lo, hi = -30.0, temp_c
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        tw = c_to_f(stull_wet_bulb_c(temp_c, relative_humidity(temp_c, mid)))
        if tw < target_f:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def weather_fixtures():
    _weather(DATA / "weather" / "texas.csv", 26.0, 5.5, 18.0, 1.5, -5, 1)
    _weather(DATA / "weather" / "ireland.csv", 12.0, 3.5, 7.5, 1.0, 1, 2)
    dew = _dewpoint_for_wet_bulb(20.0, 59.0)
    rows = [((START + timedelta(hours=h)).strftime("%Y-%m-%dT%H:%M:%SZ"), "20.0", f"{dew:.6f}") for h in range(HOURS)]
    _write(DATA / "weather" / "constant_59f.csv", ["timestamp_utc", "temp_c", "dewpoint_c"], rows)


if __name__ == "__main__":
    reported_tables()
    grid_fixtures()
    weather_fixtures()

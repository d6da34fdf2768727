"""Time-varying water usage effectiveness from outdoor wet-bulb temperature.

Dew point is turned into relative humidity with the Magnus formula, wet bulb
comes from Stull's (2011) closed-form fit, and the cubic cooling-tower model
maps wet bulb (in Fahrenheit) to litres per kWh.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

MAGNUS_A = 17.625
MAGNUS_B = 243.04  # degC

# cubic coefficients in degF; see notes in README on the corrected exponents
WUE_COEFFS = (6e-5, -0.01, 0.61, -10.40)

STULL_RH_RANGE = (5.0, 99.0)
STULL_T_RANGE = (-20.0, 50.0)


class WeatherParseError(ValueError):
    pass


@dataclass(frozen=True)
class WueModelConfig:
    s: float = 10.0
    clamp_negative: bool = True

    def __post_init__(self):
        if not self.s > 1:
            raise ValueError(f"cycles of concentration must be > 1, got {self.s!r}")


@dataclass(frozen=True)
class WeatherSample:
    timestamp: datetime
    temp_c: float
    dewpoint_c: float

    def __post_init__(self):
        if self.dewpoint_c > self.temp_c:
            raise ValueError(f"dew point {self.dewpoint_c} above temperature {self.temp_c} at {self.timestamp}")


def relative_humidity(temp_c, dewpoint_c):
    """Relative humidity in percent from dry-bulb and dew-point temperatures."""
    t = np.asarray(temp_c, dtype=float)
    td = np.asarray(dewpoint_c, dtype=float)
    if np.any(td > t):
        raise ValueError("dew point above temperature")
    rh = 100.0 * np.exp(MAGNUS_A * td / (MAGNUS_B + td) - MAGNUS_A * t / (MAGNUS_B + t))
    return float(rh) if rh.ndim == 0 else rh


def stull_wet_bulb_c(temp_c, rh):
    """Stull's wet-bulb approximation (degC) at standard sea-level pressure."""
    t = np.asarray(temp_c, dtype=float)
    rh = np.asarray(rh, dtype=float)
    bad = (rh < STULL_RH_RANGE[0]) | (rh > STULL_RH_RANGE[1]) | (t < STULL_T_RANGE[0]) | (t > STULL_T_RANGE[1])
    if np.any(bad):
        warnings.warn("wet-bulb inputs outside the fitted range of the Stull approximation", RuntimeWarning, stacklevel=2)
    tw = (
        t * np.arctan(0.151977 * np.sqrt(rh + 8.313659))
        + np.arctan(t + rh)
        - np.arctan(rh - 1.676331)
        + 0.00391838 * rh**1.5 * np.arctan(0.023101 * rh)
        - 4.686035
    )
    return float(tw) if tw.ndim == 0 else tw


def c_to_f(temp_c):
    return temp_c * 9.0 / 5.0 + 32.0


def wet_bulb_f(sample: WeatherSample) -> float:
    rh = relative_humidity(sample.temp_c, sample.dewpoint_c)
    return c_to_f(stull_wet_bulb_c(sample.temp_c, rh))


def wue_estimate(t_w_f, cfg: WueModelConfig = WueModelConfig()):
    """Estimated WUE in l/kWh for a wet-bulb temperature in degF."""
    t = np.asarray(t_w_f, dtype=float)
    a3, a2, a1, a0 = WUE_COEFFS
    inner = ((a3 * t + a2) * t + a1) * t + a0
    if cfg.clamp_negative:
        inner = np.where(inner < 0, 0.0, inner)
    out = cfg.s / (cfg.s - 1.0) * inner
    return float(out) if out.ndim == 0 else out


def hourly_wue_series(samples: Sequence[WeatherSample], cfg: WueModelConfig = WueModelConfig()) -> List[Tuple[datetime, float]]:
    for prev, cur in zip(samples, samples[1:]):
        if cur.timestamp <= prev.timestamp:
            raise ValueError(f"weather samples must be strictly increasing in time: {prev.timestamp} then {cur.timestamp}")
    if not samples:
        return []
    temps = np.array([s.temp_c for s in samples])
    dews = np.array([s.dewpoint_c for s in samples])
    tw = c_to_f(stull_wet_bulb_c(temps, relative_humidity(temps, dews)))
    wue = np.atleast_1d(wue_estimate(tw, cfg))
    return [(s.timestamp, float(w)) for s, w in zip(samples, wue)]


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    text = text.strip()
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def load_weather_csv(path) -> List[WeatherSample]:
    """Read ``timestamp_utc,temp_c,dewpoint_c`` rows; errors carry the file row number."""
    path = Path(path)
    samples = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"timestamp_utc", "temp_c", "dewpoint_c"} - set(reader.fieldnames or ())
        if missing:
            raise WeatherParseError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            lineno = reader.line_num
            try:
                samples.append(
                    WeatherSample(
                        timestamp=parse_timestamp(row["timestamp_utc"]),
                        temp_c=float(row["temp_c"]),
                        dewpoint_c=float(row["dewpoint_c"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise WeatherParseError(f"{path}: row {lineno}: {exc}") from exc
    return samples

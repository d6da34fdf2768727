"""Regional grid intensities derived from a power-source mix.

A region's carbon, water and land intensity per kWh is the share-weighted
mean of per-source factors. Mixes come from a backend: an hourly fixture CSV,
a static per-region mix, or (opt-in) a remote HTTP API with an on-disk cache.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import urllib.request
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, Union

from .footprint import RegionProfile
from .wue import format_timestamp, parse_timestamp

SOURCES = ("coal", "gas", "nuclear", "wind", "solar", "hydro", "biomass", "oil", "geothermal", "other")
FACTOR_KINDS = ("ci", "water", "land")
SHARE_TOL = 1e-6


class UnknownSourceError(KeyError):
    def __str__(self):
        return self.args[0]


class UnknownRegionError(KeyError):
    def __str__(self):
        return self.args[0]


class FixtureRangeError(LookupError):
    pass


class RemoteFetchError(RuntimeError):
    """The remote grid-data service failed (as opposed to a cache miss)."""


@dataclass(frozen=True)
class SourceMix:
    region_id: str
    shares: Mapping[str, float]

    def __post_init__(self):
        bad = {k: v for k, v in self.shares.items() if not v >= 0}
        if bad:
            raise ValueError(f"mix for {self.region_id!r} has negative shares: {bad}")
        total = math.fsum(self.shares.values())
        if abs(total - 1.0) > SHARE_TOL:
            raise ValueError(f"mix for {self.region_id!r} sums to {total!r}, expected 1")
        object.__setattr__(self, "shares", dict(sorted(self.shares.items())))

    @classmethod
    def normalized(cls, region_id: str, amounts: Mapping[str, float]) -> "SourceMix":
        """Build a mix from absolute amounts (e.g. MW per source)."""
        amounts = {k: float(v) for k, v in amounts.items() if v}
        total = math.fsum(amounts.values())
        if total <= 0:
            raise ValueError(f"no generation reported for {region_id!r}")
        return cls(region_id, {k: v / total for k, v in amounts.items()})


@dataclass(frozen=True)
class SourceFactors:
    """Per-source intensities: ``table[source] = (ci g/kWh, water l/kWh, land m2/kWh)``.

    ``fallback`` decides what happens for a source missing from the table:
    ``"mix-mean"`` uses the share-weighted mean of the known sources in the same
    mix, a 3-tuple gives explicit factors, ``None`` raises.
    """

    table: Mapping[str, Tuple[float, float, float]]
    fallback: Union[str, Tuple[float, float, float], None] = "mix-mean"

    def __post_init__(self):
        for src, vals in self.table.items():
            if len(vals) != 3 or any(not v >= 0 for v in vals):
                raise ValueError(f"factors for source {src!r} must be three values >= 0, got {vals!r}")
        if isinstance(self.fallback, str) and self.fallback != "mix-mean":
            raise ValueError(f"unknown fallback mode {self.fallback!r}")


def _kind_index(which: str) -> int:
    try:
        return FACTOR_KINDS.index(which)
    except ValueError:
        raise ValueError(f"factor kind must be one of {FACTOR_KINDS}, got {which!r}") from None


def mix_to_intensity(mix: SourceMix, factors: SourceFactors, which: str) -> float:
    """Share-weighted mean of one factor kind over the sources in ``mix``."""
    k = _kind_index(which)
    known = {s: w for s, w in mix.shares.items() if s in factors.table}
    unknown = {s: w for s, w in mix.shares.items() if s not in factors.table}
    total = math.fsum(w * factors.table[s][k] for s, w in known.items())
    if not unknown:
        return total
    unknown_share = math.fsum(unknown.values())
    if unknown_share == 0:
        return total
    fb = factors.fallback
    if fb is None:
        raise UnknownSourceError(f"no intensity factors for source {sorted(unknown)[0]!r} in mix {mix.region_id!r}")
    if fb == "mix-mean":
        known_share = math.fsum(known.values())
        if known_share == 0:
            raise UnknownSourceError(
                f"mix {mix.region_id!r} has only unknown sources {sorted(unknown)}; cannot derive a fallback"
            )
        return total + unknown_share * (total / known_share)
    return total + unknown_share * float(fb[k])


def region_profile_from_mix(mix: SourceMix, factors: SourceFactors, wsf: float, cclf: float) -> RegionProfile:
    return RegionProfile(
        region_id=mix.region_id,
        ci_grid=mix_to_intensity(mix, factors, "ci"),
        ewif_grid=mix_to_intensity(mix, factors, "water"),
        elif_grid=mix_to_intensity(mix, factors, "land"),
        wsf=wsf,
        cclf=cclf,
    )


def floor_hour(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(minute=0, second=0, microsecond=0)


# -- backends ---------------------------------------------------------------


class FixtureBackend:
    """Hourly mixes from a long-format CSV ``region_id,timestamp_utc,source,share``."""

    def __init__(self, rows: Mapping[Tuple[str, datetime], SourceMix]):
        self._rows = dict(rows)
        self._hours: Dict[str, list] = defaultdict(list)
        for region, hour in self._rows:
            self._hours[region].append(hour)
        for hours in self._hours.values():
            hours.sort()

    @classmethod
    def from_csv(cls, path) -> "FixtureBackend":
        acc: Dict[Tuple[str, datetime], Dict[str, float]] = defaultdict(dict)
        with Path(path).open(newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                key = (row["region_id"], floor_hour(parse_timestamp(row["timestamp_utc"])))
                src = row["source"].strip()
                if src in acc[key]:
                    raise ValueError(f"{path}: row {reader.line_num}: duplicate source {src!r} for {key[0]} {key[1]}")
                acc[key][src] = float(row["share"])
        return cls({k: SourceMix(k[0], v) for k, v in acc.items()})

    @property
    def regions(self):
        return sorted(self._hours)

    def available_range(self, region_id: str) -> Tuple[datetime, datetime]:
        hours = self._hours[region_id]
        return hours[0], hours[-1]

    def fetch_mix(self, region_id: str, timestamp: datetime) -> SourceMix:
        if region_id not in self._hours:
            raise UnknownRegionError(f"region {region_id!r} not in mix fixture (known: {', '.join(self.regions)})")
        hour = floor_hour(timestamp)
        try:
            return self._rows[(region_id, hour)]
        except KeyError:
            lo, hi = self.available_range(region_id)
            raise FixtureRangeError(
                f"no mix for {region_id!r} at {format_timestamp(hour)}; fixture covers "
                f"{format_timestamp(lo)} .. {format_timestamp(hi)}"
            ) from None


class StaticMixBackend:
    """One mix per region, returned for every hour."""

    def __init__(self, mixes: Mapping[str, SourceMix]):
        self._mixes = dict(mixes)

    @classmethod
    def from_fixture(cls, fixture: FixtureBackend, at: datetime) -> "StaticMixBackend":
        return cls({r: fixture.fetch_mix(r, at) for r in fixture.regions})

    @property
    def regions(self):
        return sorted(self._mixes)

    def fetch_mix(self, region_id: str, timestamp: datetime) -> SourceMix:
        try:
            return self._mixes[region_id]
        except KeyError:
            raise UnknownRegionError(f"region {region_id!r} has no static mix") from None


Transport = Callable[[str, Mapping[str, str]], bytes]


def _urllib_transport(url: str, headers: Mapping[str, str]) -> bytes:
    req = urllib.request.Request(url, headers=dict(headers))
    with urllib.request.urlopen(req, timeout=30) as resp:
        return resp.read()


class RemoteBackend:
    """Power breakdown from an Electricity Maps style HTTP API.

    Responses are cached verbatim, one file per (region, hour), named by the
    SHA-256 of ``"<region>|<hour RFC3339>"``. A cached hour never hits the
    network again, so reruns are offline-reproducible.
    """

    default_url = "https://api.electricitymap.org/v3/power-breakdown/past"

    def __init__(self, cache_dir, token: Optional[str] = None, url: Optional[str] = None, transport: Optional[Transport] = None):
        self.cache_dir = Path(cache_dir)
        self.token = token if token is not None else os.environ.get("ECOORC_GRID_TOKEN", "")
        self.url = url or self.default_url
        self.transport = transport or _urllib_transport

    @staticmethod
    def cache_key(region_id: str, hour: datetime) -> str:
        raw = f"{region_id}|{format_timestamp(hour)}".encode()
        return hashlib.sha256(raw).hexdigest() + ".json"

    def cache_path(self, region_id: str, timestamp: datetime) -> Path:
        return self.cache_dir / self.cache_key(region_id, floor_hour(timestamp))

    def fetch_raw(self, region_id: str, timestamp: datetime) -> bytes:
        path = self.cache_path(region_id, timestamp)
        if path.exists():
            return path.read_bytes()
        hour = floor_hour(timestamp)
        url = f"{self.url}?zone={region_id}&datetime={format_timestamp(hour)}"
        try:
            payload = self.transport(url, {"auth-token": self.token})
        except Exception as exc:
            raise RemoteFetchError(f"fetching {region_id} at {format_timestamp(hour)} failed: {exc}") from exc
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        # write-then-rename so concurrent readers never see a partial file
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        tmp.write_bytes(payload)
        os.replace(tmp, path)
        return payload

    def fetch_mix(self, region_id: str, timestamp: datetime) -> SourceMix:
        payload = self.fetch_raw(region_id, timestamp)
        try:
            data = json.loads(payload)
            breakdown = data.get("powerConsumptionBreakdown") or data["powerProductionBreakdown"]
        except (ValueError, KeyError) as exc:
            raise RemoteFetchError(f"malformed response for {region_id}: {exc}") from exc
        amounts = {}
        for src, mw in breakdown.items():
            if mw is None:
                continue
            name = _REMOTE_SOURCE_NAMES.get(src, src)
            amounts[name] = amounts.get(name, 0.0) + max(float(mw), 0.0)
        return SourceMix.normalized(region_id, amounts)


_REMOTE_SOURCE_NAMES = {
    "hydro discharge": "hydro",
    "battery discharge": "other",
    "unknown": "other",
}


def fetch_mix(backend, region_id: str, timestamp: datetime) -> SourceMix:
    return backend.fetch_mix(region_id, timestamp)


# -- region sources ------------------------------------------------------------
# A region source answers "what does region R look like at hour t"; the
# simulator asks it once per round.


class StaticRegions:
    def __init__(self, regions: Mapping[str, RegionProfile]):
        self.regions = dict(regions)

    def region_at(self, region_id: str, timestamp: datetime) -> RegionProfile:
        try:
            return self.regions[region_id]
        except KeyError:
            raise UnknownRegionError(f"unknown region {region_id!r}") from None

    def __contains__(self, region_id):
        return region_id in self.regions


class MixRegions:
    """Regions whose grid intensities follow an hourly source mix.

    ``base`` supplies the water scarcity and capture-loss factors, which do
    not depend on the mix.
    """

    def __init__(self, backend, factors: SourceFactors, base: Mapping[str, RegionProfile]):
        self.backend = backend
        self.factors = factors
        self.base = dict(base)
        self._cache: Dict[Tuple[str, datetime], RegionProfile] = {}

    def region_at(self, region_id: str, timestamp: datetime) -> RegionProfile:
        key = (region_id, floor_hour(timestamp))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if region_id not in self.base:
            raise UnknownRegionError(f"unknown region {region_id!r}")
        b = self.base[region_id]
        region = region_profile_from_mix(self.backend.fetch_mix(region_id, timestamp), self.factors, b.wsf, b.cclf)
        self._cache[key] = region
        return region

    def __contains__(self, region_id):
        return region_id in self.base


# -- CSV IO -----------------------------------------------------------------


def load_source_factors(path, fallback="mix-mean") -> SourceFactors:
    table = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            table[row["source"].strip()] = (
                float(row["ci_g_per_kwh"]),
                float(row["water_l_per_kwh"]),
                float(row["land_m2_per_kwh"]),
            )
    return SourceFactors(table, fallback)


def write_source_factors(factors: SourceFactors, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source", "ci_g_per_kwh", "water_l_per_kwh", "land_m2_per_kwh"])
        for src in sorted(factors.table):
            w.writerow([src, *(repr(float(v)) for v in factors.table[src])])


def write_mix_csv(mixes: Iterable[Tuple[datetime, SourceMix]], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "timestamp_utc", "source", "share"])
        for ts, mix in mixes:
            for src, share in mix.shares.items():
                w.writerow([mix.region_id, format_timestamp(ts), src, repr(float(share))])


REGION_COLUMNS = ("region_id", "ci_grid", "ewif_grid", "elif_grid", "wsf", "cclf")


def write_region_profiles(regions: Iterable[RegionProfile], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REGION_COLUMNS)
        for r in regions:
            d = r.to_dict()
            w.writerow([d["region_id"], *(repr(float(d[c])) for c in REGION_COLUMNS[1:])])


def load_region_profiles(path) -> Dict[str, RegionProfile]:
    """Read region rows; intensity columns may be absent when they come from a mix."""
    out = {}
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            data = {k: v for k, v in row.items() if v not in (None, "")}
            region = RegionProfile.from_dict(data)
            out[region.region_id] = region
    return out

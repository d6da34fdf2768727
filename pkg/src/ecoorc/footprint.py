"""Data-center sustainability profiles and per-job footprint formulas.

Every footprint function takes the energy drawn by a job (kWh, scalar or
numpy array) and a :class:`DataCenterProfile`, and is linear in the energy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

FACTORS = ("carbon", "water", "land", "ewaste")
N_FACTORS = len(FACTORS)
FACTOR_UNITS = {"carbon": "g CO2", "water": "l", "land": "g CO2 capture loss", "ewaste": "g"}


class MissingDataError(ValueError):
    """A metric was requested that needs a field the dataset does not provide."""


@dataclass(frozen=True)
class RegionProfile:
    """Regional intensities of the grid a data center draws from.

    ``cclf`` is an annual rate (g CO2 per m2 per year) used as a plain
    multiplier.
    """

    region_id: str
    ci_grid: float = 0.0
    ewif_grid: float = 0.0
    elif_grid: float = 0.0
    wsf: float = 0.0
    cclf: float = 0.0

    def __post_init__(self):
        for name in ("ci_grid", "ewif_grid", "elif_grid", "wsf", "cclf"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"region {self.region_id!r}: {name} must be a finite value >= 0, got {value!r}")

    def to_dict(self) -> dict:
        return {
            "region_id": self.region_id,
            "ci_grid": self.ci_grid,
            "ewif_grid": self.ewif_grid,
            "elif_grid": self.elif_grid,
            "wsf": self.wsf,
            "cclf": self.cclf,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RegionProfile":
        return cls(
            region_id=str(data["region_id"]),
            ci_grid=float(data.get("ci_grid", 0.0)),
            ewif_grid=float(data.get("ewif_grid", 0.0)),
            elif_grid=float(data.get("elif_grid", 0.0)),
            wsf=float(data.get("wsf", 0.0)),
            cclf=float(data.get("cclf", 0.0)),
        )


@dataclass(frozen=True)
class DataCenterProfile:
    """Reported and derived parameters of one facility.

    ``area`` and ``annual_it_energy`` may be ``None`` when the source table
    has no value; on-site land impact is then taken as zero.
    """

    dc_id: str
    region: RegionProfile
    pue: float = 1.0
    wue: float = 0.0
    p_onsite: float = 0.0
    ci_onsite: float = 0.0
    ewif_onsite: float = 0.0
    area: Optional[float] = None
    annual_it_energy: Optional[float] = None
    ewi: float = 0.0
    s_max: int = 5

    def __post_init__(self):
        errs = []
        if not self.pue >= 1.0:
            errs.append(f"pue must be >= 1, got {self.pue!r}")
        if not 0.0 <= self.p_onsite <= 1.0:
            errs.append(f"p_onsite must be in [0, 1], got {self.p_onsite!r}")
        for name in ("wue", "ci_onsite", "ewif_onsite", "ewi"):
            if not getattr(self, name) >= 0:
                errs.append(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.area is not None and not self.area >= 0:
            errs.append(f"area must be >= 0, got {self.area!r}")
        if self.annual_it_energy is not None and not self.annual_it_energy >= 0:
            errs.append(f"annual_it_energy must be >= 0, got {self.annual_it_energy!r}")
        if int(self.s_max) != self.s_max or self.s_max < 0:
            errs.append(f"s_max must be a non-negative integer, got {self.s_max!r}")
        if errs:
            raise ValueError(f"data center {self.dc_id!r}: " + "; ".join(errs))

    @property
    def p_grid(self) -> float:
        """Fraction of power drawn from the regional grid."""
        return 1.0 - self.p_onsite

    @property
    def has_land_data(self) -> bool:
        return self.area is not None and self.annual_it_energy is not None

    def with_region(self, region: RegionProfile) -> "DataCenterProfile":
        return replace(self, region=region)


@dataclass(frozen=True)
class Job:
    """A unit of work owned by one user; ``d_prev`` is set once it is running."""

    job_id: int
    owner: str
    power_kw: float
    lifetime_hours: int
    arrival_hour: int = 0
    d_prev: Optional[str] = None

    def __post_init__(self):
        if self.lifetime_hours < 1 or int(self.lifetime_hours) != self.lifetime_hours:
            raise ValueError(f"job {self.job_id!r}: lifetime_hours must be an integer >= 1, got {self.lifetime_hours!r}")
        if not self.power_kw >= 0:
            raise ValueError(f"job {self.job_id!r}: power_kw must be >= 0, got {self.power_kw!r}")

    @property
    def deployed(self) -> bool:
        return self.d_prev is not None

    def placed_at(self, dc_id: Optional[str]) -> "Job":
        return replace(self, d_prev=dc_id)


@dataclass(frozen=True)
class FootprintVector:
    carbon_g: float = 0.0
    water_l: float = 0.0
    land_g: float = 0.0
    ewaste_g: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.carbon_g, self.water_l, self.land_g, self.ewaste_g], dtype=float)

    @classmethod
    def from_array(cls, values) -> "FootprintVector":
        c, w, l, e = (float(v) for v in values)
        return cls(c, w, l, e)

    def __add__(self, other: "FootprintVector") -> "FootprintVector":
        return FootprintVector(
            self.carbon_g + other.carbon_g,
            self.water_l + other.water_l,
            self.land_g + other.land_g,
            self.ewaste_g + other.ewaste_g,
        )

    def __getitem__(self, factor: str) -> float:
        return {"carbon": self.carbon_g, "water": self.water_l, "land": self.land_g, "ewaste": self.ewaste_g}[factor]


def carbon_footprint(e_j, dc: DataCenterProfile):
    """Grams of CO2 for ``e_j`` kWh of IT energy, split across on-site and grid supply."""
    return (e_j * dc.pue) * (dc.ci_onsite * dc.p_onsite + dc.region.ci_grid * dc.p_grid)


def water_onsite(e_j, dc: DataCenterProfile):
    # cooling water plus water used by on-site generation, scaled by regional scarcity
    return e_j * (dc.wue + dc.p_onsite * dc.ewif_onsite) * (1.0 + dc.region.wsf)


def water_offsite(e_j, dc: DataCenterProfile):
    return (e_j * dc.pue) * (dc.p_grid * dc.region.ewif_grid) * (1.0 + dc.region.wsf)


def lue(dc: DataCenterProfile) -> float:
    """Land-use effectiveness: facility area over annual IT energy (m2/kWh)."""
    if dc.area is None or dc.annual_it_energy is None:
        raise MissingDataError(f"data center {dc.dc_id!r} has no area or annual IT energy")
    if dc.annual_it_energy == 0:
        raise ValueError(f"data center {dc.dc_id!r}: annual_it_energy is 0, LUE is undefined")
    return dc.area / dc.annual_it_energy


def land_onsite(e_j, dc: DataCenterProfile):
    if not dc.has_land_data:
        return e_j * 0.0
    return e_j * lue(dc) * dc.region.cclf


def land_offsite(e_j, dc: DataCenterProfile):
    return e_j * dc.pue * (dc.p_grid * dc.region.elif_grid * dc.region.cclf)


def ewaste_footprint(e_j, dc: DataCenterProfile):
    return e_j * dc.ewi


def footprint(e_j, dc: DataCenterProfile) -> FootprintVector:
    """Full impact vector for a job that consumed ``e_j`` kWh at ``dc``."""
    return FootprintVector(
        carbon_g=float(carbon_footprint(e_j, dc)),
        water_l=float(water_onsite(e_j, dc) + water_offsite(e_j, dc)),
        land_g=float(land_onsite(e_j, dc) + land_offsite(e_j, dc)),
        ewaste_g=float(ewaste_footprint(e_j, dc)),
    )


def per_kwh_profile(dc: DataCenterProfile) -> FootprintVector:
    """Impact of one kWh at ``dc``; the vector used to rank data centers."""
    return footprint(1.0, dc)


def profile_matrix(dcs) -> np.ndarray:
    """Stack per-kWh profiles into an ``(n_dcs, 4)`` array in fleet order."""
    out = np.zeros((len(dcs), N_FACTORS))
    for i, dc in enumerate(dcs):
        out[i] = per_kwh_profile(dc).as_array()
    return out


def energy_footprints(energy_kwh: np.ndarray, dc: DataCenterProfile) -> np.ndarray:
    """Footprints for an array of job energies at one data center, shape ``(n, 4)``."""
    e = np.asarray(energy_kwh, dtype=float)
    out = np.empty(e.shape + (N_FACTORS,))
    out[..., 0] = carbon_footprint(e, dc)
    out[..., 1] = water_onsite(e, dc) + water_offsite(e, dc)
    out[..., 2] = land_onsite(e, dc) + land_offsite(e, dc)
    out[..., 3] = ewaste_footprint(e, dc)
    return out

"""Bundled provider tables and the estimation steps that turn them into profiles.

The CSVs under ``ecoorc/data/reported`` hold provider-reported numbers as
published. Fields no provider reports are estimated here:

* Meta reports only facility energy and one fleet-wide PUE (1.08); IT energy
  is facility energy divided by that PUE.
* Google, Azure and AWS report no energy; IT energy is taken as a 100 MW
  hyperscale facility running all year, 876,000 MWh.
* WUE for Google and Meta is annual water withdrawal over IT energy. AWS
  publishes only a global WUE of 0.18 l/kWh.
* No provider reports on-site generation or e-waste, so both are zero.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path
from typing import Dict, Optional

from ..footprint import DataCenterProfile, RegionProfile

PROVIDERS = ("azure", "google", "aws", "meta")
META_GLOBAL_PUE = 1.08
AWS_GLOBAL_WUE = 0.18
HYPERSCALE_IT_KWH = 876_000_000.0
DEFAULT_S_MAX = 5


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("ecoorc").joinpath("data", *parts)))


def _num(text: str) -> Optional[float]:
    text = (text or "").strip()
    return float(text) if text else None


def load_reported(provider: str, path=None) -> Dict[str, Dict[str, Optional[float]]]:
    """Rows of one provider table keyed by location; blank cells become ``None``."""
    if provider not in PROVIDERS:
        raise ValueError(f"unknown provider {provider!r}; expected one of {PROVIDERS}")
    path = Path(path) if path else data_path("reported", f"{provider}.csv")
    rows = {}
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            loc = row.pop("location").strip()
            row.pop("note", None)
            rows[loc] = {k: _num(v) for k, v in row.items()}
    return rows


def derive_profile(
    provider: str,
    row: Dict[str, Optional[float]],
    dc_id: str,
    region: RegionProfile,
    s_max: int = DEFAULT_S_MAX,
) -> DataCenterProfile:
    if provider == "meta":
        pue = META_GLOBAL_PUE
        it_kwh = row["facility_mwh"] * 1000.0 / META_GLOBAL_PUE
        wue = row["water_withdrawal_ml"] * 1e6 / it_kwh
    elif provider == "google":
        pue = row["pue"]
        it_kwh = HYPERSCALE_IT_KWH
        wue = row["water_withdrawal_ml"] * 1e6 / it_kwh
    elif provider == "azure":
        pue = row["pue"]
        it_kwh = HYPERSCALE_IT_KWH
        wue = row["wue_l_per_kwh"]
    elif provider == "aws":
        pue = row["pue"]
        it_kwh = HYPERSCALE_IT_KWH
        wue = AWS_GLOBAL_WUE
    else:
        raise ValueError(f"unknown provider {provider!r}")
    return DataCenterProfile(
        dc_id=dc_id,
        region=region,
        pue=pue,
        wue=wue,
        area=row.get("land_m2"),
        annual_it_energy=it_kwh,
        s_max=s_max,
    )

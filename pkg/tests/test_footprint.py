import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_dc
from ecoorc.footprint import (
    FootprintVector,
    Job,
    MissingDataError,
    RegionProfile,
    carbon_footprint,
    energy_footprints,
    ewaste_footprint,
    footprint,
    land_offsite,
    land_onsite,
    lue,
    per_kwh_profile,
    profile_matrix,
    water_offsite,
    water_onsite,
)

IOWA_AREA = 37904.0
HYPERSCALE_IT = 876e6

close = lambda a, b: math.isclose(a, b, rel_tol=1e-9, abs_tol=0.0)


def test_carbon_mixed_supply():
    dc = make_dc(pue=1.2, p_onsite=0.5, ci_onsite=100, ci_grid=300)
    assert close(carbon_footprint(1, dc), 240.0)


def test_carbon_iowa_grid_only():
    dc = make_dc(pue=1.16, ci_grid=500)
    assert close(carbon_footprint(10, dc), 5800.0)
    assert carbon_footprint(0, dc) == 0


def test_water_onsite_iowa():
    dc = make_dc(wue=0.19, wsf=0.25)
    assert close(water_onsite(2, dc), 0.475)
    assert water_onsite(0, dc) == 0


def test_water_onsite_reduces_to_wue_only():
    dc = make_dc(wue=0.37, ewif_onsite=4.0)
    assert water_onsite(3.5, dc) == 3.5 * 0.37


def test_water_offsite():
    dc = make_dc(pue=1.16, ewif_grid=1.9, wsf=0.25)
    assert close(water_offsite(1, dc), 2.755)
    assert water_offsite(0, dc) == 0
    assert water_offsite(5, make_dc(pue=1.16, p_onsite=1.0, ewif_grid=1.9, wsf=0.25)) == 0


def test_lue_values():
    assert close(lue(make_dc(area=IOWA_AREA, annual_it_energy=HYPERSCALE_IT)), 4.3269406392694066e-05)
    assert lue(make_dc(area=1.0, annual_it_energy=1.0)) == 1.0
    assert lue(make_dc(area=0.0, annual_it_energy=5.0)) == 0.0


def test_lue_errors():
    with pytest.raises(ValueError):
        lue(make_dc(area=10.0, annual_it_energy=0.0))
    with pytest.raises(MissingDataError):
        lue(make_dc(area=None, annual_it_energy=1.0))


def test_land_onsite():
    # lue chosen so that it equals 4.3269e-5 exactly
    dc = make_dc(area=4.3269e-5, annual_it_energy=1.0, cclf=200)
    assert close(land_onsite(100, dc), 0.86538)
    assert land_onsite(0, dc) == 0
    assert land_onsite(100, make_dc(area=4.3269e-5, annual_it_energy=1.0, cclf=0)) == 0


def test_land_onsite_without_land_data_is_zero():
    assert land_onsite(10, make_dc(cclf=300)) == 0.0


def test_land_offsite():
    dc = make_dc(pue=1.1, elif_grid=0.002, cclf=150)
    assert close(land_offsite(1, dc), 0.33)
    assert land_offsite(0, dc) == 0
    assert land_offsite(4, make_dc(pue=1.1, p_onsite=1.0, elif_grid=0.002, cclf=150)) == 0


def test_ewaste():
    assert close(ewaste_footprint(50, make_dc(ewi=0.4)), 20.0)
    assert ewaste_footprint(50, make_dc(ewi=0.0)) == 0
    assert ewaste_footprint(0, make_dc(ewi=0.4)) == 0


def test_per_kwh_profile_zero():
    assert per_kwh_profile(make_dc()).as_array().tolist() == [0.0, 0.0, 0.0, 0.0]


def test_per_kwh_profile_iowa_carbon():
    dc = make_dc(pue=1.16, wue=0.19, ci_grid=437.5, area=IOWA_AREA, annual_it_energy=HYPERSCALE_IT)
    assert per_kwh_profile(dc).carbon_g == 1.16 * 437.5


def test_profile_matrix_shape_and_order():
    dcs = [make_dc("a", ci_grid=1), make_dc("b", ci_grid=2)]
    m = profile_matrix(dcs)
    assert m.shape == (2, 4)
    assert m[:, 0].tolist() == [1.0, 2.0]


def test_validation():
    with pytest.raises(ValueError, match="pue"):
        make_dc(pue=0.9)
    with pytest.raises(ValueError, match="p_onsite"):
        make_dc(p_onsite=1.5)
    with pytest.raises(ValueError):
        RegionProfile("R", ci_grid=-1)
    with pytest.raises(ValueError):
        Job(1, "u", 1.0, 0)


def test_region_round_trip():
    r = RegionProfile("X", 1.5, 2.5, 0.001, 0.3, 120.0)
    assert RegionProfile.from_dict(r.to_dict()) == r


def test_vector_add_and_index():
    v = FootprintVector(1, 2, 3, 4) + FootprintVector(1, 1, 1, 1)
    assert v.as_array().tolist() == [2, 3, 4, 5]
    assert v["water"] == 3
    assert FootprintVector.from_array(v.as_array()) == v


# -- properties ----------------------------------------------------------------

nonneg = st.floats(0, 1e4, allow_nan=False, allow_infinity=False)
frac = st.floats(0, 1)


@st.composite
def datacenters(draw):
    return make_dc(
        pue=draw(st.floats(1, 3)),
        wue=draw(nonneg),
        p_onsite=draw(frac),
        ci_onsite=draw(nonneg),
        ewif_onsite=draw(nonneg),
        area=draw(st.one_of(st.none(), nonneg)),
        annual_it_energy=draw(st.floats(1, 1e9)),
        ewi=draw(nonneg),
        ci_grid=draw(nonneg),
        ewif_grid=draw(nonneg),
        elif_grid=draw(st.floats(0, 1)),
        wsf=draw(st.floats(0, 5)),
        cclf=draw(nonneg),
    )


OPS = (carbon_footprint, water_onsite, water_offsite, land_onsite, land_offsite, ewaste_footprint)


@given(datacenters(), st.floats(0, 1e4), st.floats(0, 100))
def test_linearity_in_energy(dc, e, k):
    for op in OPS:
        a, b = op(k * e, dc), k * op(e, dc)
        assert a >= 0
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-300)


@given(datacenters())
def test_profile_is_sum_of_operations(dc):
    p = per_kwh_profile(dc)
    assert p.carbon_g == carbon_footprint(1.0, dc)
    assert p.water_l == water_onsite(1.0, dc) + water_offsite(1.0, dc)
    assert p.land_g == land_onsite(1.0, dc) + land_offsite(1.0, dc)
    assert p.ewaste_g == ewaste_footprint(1.0, dc)


@given(datacenters(), st.lists(st.floats(0, 1e3), min_size=1, max_size=8))
def test_energy_footprints_matches_scalar(dc, energies):
    arr = energy_footprints(np.array(energies), dc)
    for k, e in enumerate(energies):
        np.testing.assert_allclose(arr[k], footprint(e, dc).as_array(), rtol=1e-12, atol=1e-300)

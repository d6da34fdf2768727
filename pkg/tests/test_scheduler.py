import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_dc
from ecoorc._jit import py_func
from ecoorc.footprint import FootprintVector, Job
from ecoorc.scheduler import (
    FleetChangedError,
    InfeasibleRoundError,
    InstanceTooLargeError,
    PlacementState,
    RoundInstance,
    SchedulerConfig,
    User,
    baseline_theta,
    brute_force_instance,
    brute_force_round,
    build_instance,
    cost,
    feasible_dcs,
    normalize_matrix,
    normalize_profiles,
    solve_instance,
    solve_round,
)
from ecoorc.scheduler import kernels

CARBON = User("u", baseline_theta("carbon"))


def test_baseline_theta():
    assert baseline_theta("carbon") == (1, 0, 0, 0)
    assert baseline_theta("water") == (0, 1, 0, 0)
    assert baseline_theta("land") == (0, 0, 1, 0)
    assert baseline_theta("ewaste") == (0, 0, 0, 1)
    with pytest.raises(ValueError):
        baseline_theta("noise")


def test_user_rejects_zero_or_negative_theta():
    with pytest.raises(ValueError):
        User("u", (0, 0, 0, 0))
    with pytest.raises(ValueError):
        User("u", (1, -1, 0, 0))


def test_minmax_examples():
    norm = normalize_profiles({"a": FootprintVector(0, 1, 1, 1), "b": FootprintVector(5, 1, 1, 1), "c": FootprintVector(10, 1, 1, 1)})
    assert [norm[k][0] for k in "abc"] == [0.0, 0.5, 1.0]
    assert [norm[k][1] for k in "abc"] == [0.0, 0.0, 0.0]
    single = normalize_profiles({"a": FootprintVector(3, 4, 5, 6)})
    assert single["a"].tolist() == [0, 0, 0, 0]
    assert normalize_profiles({"a": FootprintVector(3, 4, 5, 6)}, "none")["a"].tolist() == [3, 4, 5, 6]


def test_cost_one_hot_and_minmax():
    norm = normalize_profiles({"d1": FootprintVector(100, 9, 9, 9), "d2": FootprintVector(300, 1, 1, 1)})
    job = Job(1, "u", 2.0, 1)
    assert cost(job, "d1", CARBON, norm) == 0.0
    assert cost(job, "d2", CARBON, norm) == 1.0
    with pytest.raises(ValueError):
        cost(Job(2, "other", 1.0, 1), "d1", CARBON, norm)


def test_feasible_dcs_trigger():
    cfg = SchedulerConfig(alpha=0.1)
    job = Job(1, "u", 1.0, 3, d_prev="p")
    costs = {"p": 100.0, "a": 90.0, "b": 91.0}
    assert feasible_dcs(job, costs, PlacementState(), cfg) == {"p", "a"}
    assert feasible_dcs(Job(2, "u", 1.0, 3), costs, PlacementState(), cfg) == {"p", "a", "b"}
    assert feasible_dcs(job, {"p": 100.0, "a": 100.0, "b": 101.0}, PlacementState(), SchedulerConfig(alpha=0.0)) == {"p", "a"}
    assert feasible_dcs(job, costs, PlacementState(), SchedulerConfig(migration_enabled=False)) == {"p"}
    assert feasible_dcs(job, {"p": 1e-10, "a": 0.0}, PlacementState(), cfg) == {"p"}
    with pytest.raises(FleetChangedError):
        feasible_dcs(job, {"a": 1.0}, PlacementState(), cfg)


def test_config_validation():
    for bad in ({"alpha": 1.5}, {"capacity_mode": "x"}, {"normalization": "z"}, {"infeasibility_policy": "q"}):
        with pytest.raises(ValueError):
            SchedulerConfig(**bad)


def test_two_by_two():
    inst = RoundInstance.from_costs([[1, 2], [2, 1]], [1, 1])
    for solver in (solve_instance, brute_force_instance):
        a = solver(inst)
        assert a.tolist() == [0, 1]
        assert inst.objective(a) == 2


def test_single_job_single_dc():
    inst = RoundInstance.from_costs([[0.37]], [1])
    assert solve_instance(inst).tolist() == [0]
    assert inst.objective(np.array([0])) == 0.37


def test_empty_round():
    dcs = [make_dc("a", ci_grid=1)]
    for fn in (solve_round, brute_force_round):
        d = fn([], dcs, [CARBON], PlacementState(), SchedulerConfig())
        assert d.placements == {} and d.objective_value == 0 and d.deferred == []


def test_capacity_forces_suboptimal_choice():
    # both jobs prefer dc0; only one fits, the one with the larger regret stays there
    inst = RoundInstance.from_costs([[0.0, 0.1], [0.0, 0.9]], [1, 1])
    assert solve_instance(inst).tolist() == [1, 0]
    assert brute_force_instance(inst).tolist() == [1, 0]


def test_ties_break_towards_small_ids():
    inst = RoundInstance.from_costs(np.zeros((3, 3)), [2, 2, 2])
    assert solve_instance(inst).tolist() == [0, 0, 1]


def test_defer_drops_latest_arrivals():
    inst = RoundInstance.from_costs(np.zeros((3, 1)), [2], arrival=[2, 0, 1])
    assert solve_instance(inst).tolist() == [-1, 0, 0]
    err = RoundInstance.from_costs(np.zeros((3, 1)), [2], cfg=SchedulerConfig(infeasibility_policy="error"))
    with pytest.raises(InfeasibleRoundError):
        solve_instance(err)


def test_deployed_overflow_is_a_hard_error():
    inst = RoundInstance.from_costs(np.zeros((2, 2)), [1, 1], prev=[0, 0], cfg=SchedulerConfig(migration_enabled=False))
    with pytest.raises(InfeasibleRoundError):
        solve_instance(inst)
    with pytest.raises(InfeasibleRoundError):
        brute_force_instance(inst)


def test_deployed_jobs_outrank_new_ones():
    inst = RoundInstance.from_costs([[0.5], [0.0]], [1], prev=[0, -1])
    assert solve_instance(inst).tolist() == [0, -1]


def test_incoming_mode_exempts_resident_jobs():
    cfg = SchedulerConfig(capacity_mode="incoming", migration_enabled=False)
    inst = RoundInstance.from_costs(np.zeros((3, 1)), [1], prev=[0, 0, -1], cfg=cfg)
    assert solve_instance(inst).tolist() == [0, 0, 0]
    conc = RoundInstance.from_costs(np.zeros((3, 1)), [2], prev=[0, 0, -1], cfg=SchedulerConfig(migration_enabled=False))
    assert solve_instance(conc).tolist() == [0, 0, -1]


def test_brute_force_guard():
    inst = RoundInstance.from_costs(np.zeros((12, 4)), [12] * 4)
    with pytest.raises(InstanceTooLargeError):
        brute_force_instance(inst)


def test_solve_round_migrations_and_state():
    dcs = [make_dc("a", ci_grid=100), make_dc("b", ci_grid=300), make_dc("c", ci_grid=200)]
    job = Job(7, "u", 1.0, 5, d_prev="b")
    d = solve_round([job], dcs, [CARBON], PlacementState({7: "b"}), SchedulerConfig(alpha=0.1))
    assert d.placements == {7: "a"}
    [m] = d.migrations
    assert (m.job_id, m.from_dc, m.to_dc, m.cost_before, m.cost_after) == (7, "b", "a", 1.0, 0.0)
    assert d.next_state().assignments == {7: "a"}
    stay = solve_round([job], dcs, [CARBON], PlacementState({7: "b"}), SchedulerConfig(migration_enabled=False))
    assert stay.placements == {7: "b"} and stay.migrations == []


def test_solve_round_rejects_unknown_owner_and_vanished_dc():
    dcs = [make_dc("a")]
    with pytest.raises(KeyError):
        solve_round([Job(1, "ghost", 1.0, 1)], dcs, [CARBON], PlacementState(), SchedulerConfig())
    with pytest.raises(FleetChangedError):
        solve_round([Job(1, "u", 1.0, 1, d_prev="gone")], dcs, [CARBON], PlacementState(), SchedulerConfig())


def test_six_by_four_matches_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        inst = RoundInstance.from_costs(rng.random((6, 4)), [2, 2, 2, 2])
        a, b = solve_instance(inst), brute_force_instance(inst)
        assert abs(inst.objective(a) - inst.objective(b)) <= 1e-9
        assert a.tolist() == b.tolist()


# -- properties ----------------------------------------------------------------


@st.composite
def instances(draw):
    n = draw(st.integers(0, 6))
    m = draw(st.integers(1, 4))
    # coarse grid of costs so that ties are common
    grid = draw(st.booleans())
    cell = st.integers(0, 4).map(lambda k: k / 4) if grid else st.floats(0, 1)
    costs = np.array([[draw(cell) for _ in range(m)] for _ in range(n)], dtype=float).reshape(n, m)
    cap = np.array([draw(st.integers(1, 3)) for _ in range(m)])
    left = cap.copy()
    prev = np.full(n, -1)
    for j in range(n):
        if draw(st.booleans()):
            choices = np.flatnonzero(left > 0)
            if len(choices):
                d = int(choices[draw(st.integers(0, len(choices) - 1))])
                prev[j] = d
                left[d] -= 1
    cfg = SchedulerConfig(
        alpha=draw(st.sampled_from([0.0, 0.1, 0.3])),
        capacity_mode=draw(st.sampled_from(["concurrent", "incoming"])),
        migration_enabled=draw(st.booleans()),
    )
    arrival = [draw(st.integers(0, 3)) for _ in range(n)]
    return RoundInstance.from_costs(costs, cap, prev, cfg, arrival=arrival), cfg


@given(instances())
def test_solver_matches_brute_force(ic):
    inst, cfg = ic
    a = solve_instance(inst)
    b = brute_force_instance(inst)
    assert abs(inst.objective(a) - inst.objective(b)) <= 1e-9
    assert a.tolist() == b.tolist()

    n, m = inst.feasible.shape
    # completeness, feasibility and capacity
    for j, d in enumerate(a):
        assert d == -1 or inst.feasible[j, d]
        if inst.prev[j] >= 0:
            assert d >= 0
            if not cfg.migration_enabled:
                assert d == inst.prev[j]
            elif d != inst.prev[j]:
                assert inst.costs[j, d] <= (1 - cfg.alpha) * inst.costs[j, inst.prev[j]] + 1e-12
    for d in range(m):
        counted = [j for j in range(n) if a[j] == d and not (cfg.capacity_mode == "incoming" and inst.prev[j] == d)]
        assert len(counted) <= inst.cap[d]
    # deferral only when the network really is full and only of new jobs
    if np.any(a < 0):
        assert all(inst.prev[j] < 0 for j in np.flatnonzero(a < 0))


@given(instances())
def test_jit_and_python_kernels_agree(ic):
    inst, _ = ic
    if not len(inst.job_ids):
        return
    args = (inst.qcost, inst.feasible, inst.prev, inst.cap, inst.order, inst.incoming)
    a = kernels.ssp_assign(*args)
    b = py_func(kernels.ssp_assign)(*args)
    assert a[0].tolist() == b[0].tolist() and a[1] == b[1]
    c = kernels.enumerate_best(*args)
    d = py_func(kernels.enumerate_best)(*args)
    assert c[0].tolist() == d[0].tolist() and c[1] == d[1]


@st.composite
def fleets(draw):
    m = draw(st.integers(1, 4))
    dcs = [
        make_dc(
            f"d{k}",
            f"R{k}",
            s_max=draw(st.integers(1, 3)),
            pue=draw(st.floats(1, 2)),
            wue=draw(st.floats(0, 3)),
            ewi=draw(st.floats(0, 1)),
            ci_grid=draw(st.floats(0, 900)),
            ewif_grid=draw(st.floats(0, 5)),
            elif_grid=draw(st.floats(0, 0.05)),
            wsf=draw(st.floats(0, 1)),
            cclf=draw(st.floats(0, 500)),
        )
        for k in range(m)
    ]
    users = [
        User(f"u{k}", tuple(draw(st.floats(0, 1)) for _ in range(3)) + (1.0,))
        for k in range(2)
    ]
    n = draw(st.integers(0, 5))
    jobs = [Job(j, f"u{draw(st.integers(0, 1))}", 1.0, 1) for j in range(n)]
    return dcs, users, jobs


@st.composite
def integer_profiles(draw):
    m = draw(st.integers(1, 4))
    raw = np.array([[draw(st.integers(0, 1000)) for _ in range(4)] for _ in range(m)], dtype=float)
    dcs = [make_dc(f"d{k}", s_max=draw(st.integers(1, 3))) for k in range(m)]
    users = [User(f"u{k}", tuple(draw(st.integers(0, 4)) / 4 for _ in range(3)) + (0.5,)) for k in range(2)]
    jobs = [Job(j, f"u{draw(st.integers(0, 1))}", 1.0, 1) for j in range(draw(st.integers(0, 6)))]
    return raw, dcs, users, jobs


# a and b are exactly representable, so a*v + b is exact on integer profiles
@given(integer_profiles(), st.integers(0, 3), st.sampled_from([0.25, 0.5, 2.0, 3.0, 10.0]), st.integers(-1000, 1000))
def test_minmax_affine_invariance_of_placements(case, factor, a, b):
    raw, dcs, users, jobs = case
    moved = raw.copy()
    moved[:, factor] = a * moved[:, factor] + b
    assert np.array_equal(normalize_matrix(raw), normalize_matrix(moved))
    cfg = SchedulerConfig()
    base = solve_round(jobs, dcs, users, PlacementState(), cfg, raw)
    other = solve_round(jobs, dcs, users, PlacementState(), cfg, moved)
    assert base.placements == other.placements


@given(fleets())
def test_solve_round_is_deterministic(fleet):
    dcs, users, jobs = fleet
    a = solve_round(jobs, dcs, users, PlacementState(), SchedulerConfig())
    b = solve_round(list(reversed(jobs)), list(reversed(dcs)), users, PlacementState(), SchedulerConfig())
    assert a == b


def test_build_instance_orders_by_id():
    dcs = [make_dc("z", ci_grid=1), make_dc("a", ci_grid=2)]
    inst = build_instance([Job(5, "u", 1, 1), Job(2, "u", 1, 1)], dcs, [CARBON], PlacementState(), SchedulerConfig())
    assert inst.dc_ids == ["a", "z"] and inst.job_ids == [2, 5]


def test_disable_jit_env_selects_python_kernels():
    import json
    import os
    import subprocess
    import sys

    code = (
        "import json, numpy as np\n"
        "from ecoorc._jit import HAS_JIT\n"
        "from ecoorc.scheduler import RoundInstance, solve_instance\n"
        "rng = np.random.default_rng(5)\n"
        "inst = RoundInstance.from_costs(rng.random((8, 3)), [3, 3, 3], prev=[0, 1, -1, -1, 2, -1, -1, -1])\n"
        "print(json.dumps([HAS_JIT, solve_instance(inst).tolist()]))\n"
    )
    env = {**os.environ, "ECOORC_DISABLE_JIT": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    has_jit, assign = json.loads(out.stdout)
    assert has_jit is False
    rng = np.random.default_rng(5)
    inst = RoundInstance.from_costs(rng.random((8, 3)), [3, 3, 3], prev=[0, 1, -1, -1, 2, -1, -1, -1])
    assert solve_instance(inst).tolist() == assign

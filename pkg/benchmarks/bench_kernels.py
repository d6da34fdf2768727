"""Time the compiled kernels against their plain-Python versions.

    python3 benchmarks/bench_kernels.py [--reps N]

Both versions run on identical instances and must return identical
assignments; the script exits 1 otherwise.
"""

import argparse
import sys
import time

import numpy as np

from ecoorc._jit import HAS_JIT, py_func
from ecoorc.scheduler import kernels
from ecoorc.scheduler.model import SchedulerConfig
from ecoorc.scheduler.solve import RoundInstance


def make_instances(rng, count, n_jobs, n_dcs, deployed_frac):
    out = []
    for _ in range(count):
        costs = rng.random((n_jobs, n_dcs))
        cap = rng.integers(1, 6, n_dcs)
        prev = np.full(n_jobs, -1)
        slots = np.repeat(np.arange(n_dcs), cap)
        rng.shuffle(slots)
        k = min(int(deployed_frac * n_jobs), len(slots))
        prev[:k] = slots[:k]
        out.append(RoundInstance.from_costs(costs, cap, prev, SchedulerConfig(alpha=0.1)))
    return out


def args_of(inst):
    return inst.qcost, inst.feasible, inst.prev, inst.cap, inst.order, inst.incoming


def timed(fn, instances, reps):
    best = float("inf")
    results = None
    for _ in range(reps):
        t0 = time.perf_counter()
        results = [fn(*args_of(i)) for i in instances]
        best = min(best, time.perf_counter() - t0)
    return best, results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    if not HAS_JIT:
        print("numba unavailable or ECOORC_DISABLE_JIT set; nothing to compare")
        return 0
    rng = np.random.default_rng(a.seed)
    cases = [
        ("ssp_assign 40 jobs x 24 DCs", kernels.ssp_assign, make_instances(rng, 50, 40, 24, 0.5)),
        ("ssp_assign 120 jobs x 24 DCs", kernels.ssp_assign, make_instances(rng, 10, 120, 24, 0.7)),
        ("enumerate_best 6 jobs x 4 DCs", kernels.enumerate_best, make_instances(rng, 50, 6, 4, 0.3)),
    ]
    ok = True
    print(f"{'kernel':32s} {'numba (s)':>10s} {'python (s)':>11s} {'speedup':>8s}")
    for name, kernel, instances in cases:
        timed(kernel, instances[:1], 1)  # compile outside the timing
        t_jit, r_jit = timed(kernel, instances, a.reps)
        t_py, r_py = timed(py_func(kernel), instances, 1)
        same = all(np.array_equal(x[0], y[0]) for x, y in zip(r_jit, r_py))
        ok &= same
        print(f"{name:32s} {t_jit:10.4f} {t_py:11.4f} {t_py / t_jit:7.1f}x{'' if same else '  MISMATCH'}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

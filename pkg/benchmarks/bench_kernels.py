"""Compare the compiled and pure-Python solver backends.

    python3 benchmarks/bench_kernels.py [--n 12] [--k 3] [--T 500] [--repeat 3]
"""

import argparse
import time

import numpy as np

from minmax_paging.fractional import run_fractional
from minmax_paging.harness import random_trace
from minmax_paging.objectives import default_params, parse_objective


def time_backend(trace, backend, repeat):
    obj = parse_objective("minmax", trace.n)
    params = default_params(trace.k, obj.q, trace.T)
    best, state = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        state, _, _ = run_fractional(trace, obj, params, record=False, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--T", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    trace = random_trace(a.n, a.k, a.T, a.seed)
    t_c, s_c = time_backend(trace, "cython", a.repeat)
    t_p, s_p = time_backend(trace, "python", a.repeat)
    same = np.array_equal(s_c.x, s_p.x) and np.array_equal(s_c.dtau, s_p.dtau)
    steps = int(np.sum(s_c.steps))
    print(f"instance n={a.n} k={a.k} T={a.T} seed={a.seed} steps={steps}")
    print(f"cython  {t_c * 1e3:9.2f} ms")
    print(f"python  {t_p * 1e3:9.2f} ms")
    print(f"speedup {t_p / t_c:9.1f}x   identical x: {same}")


if __name__ == "__main__":
    main()

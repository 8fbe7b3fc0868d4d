"""Compare the compiled and pure-Python kernels on ensemble-sized workloads.

    python benchmarks/bench_kernels.py [--runs 2000] [--steps 24] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from trustdyn import TABLE1, _kernels_py, kernels
from trustdyn.estimator import observation_information

try:
    from trustdyn import _kernels as compiled
except ImportError:
    compiled = None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    idx = rng.integers(0, 3, (args.runs, args.steps)).astype(np.intp)
    obs = rng.normal(0.4, 0.3, (args.runs, args.steps, 3))
    info = observation_information(TABLE1)
    p = TABLE1

    backends = [("python", _kernels_py)]
    if compiled is not None:
        backends.append(("cython", compiled))
    else:
        print("compiled kernels not built; timing the fallback only")

    results = {}
    for name, impl in backends:
        scan = timeit.repeat(
            lambda: kernels.filter_scan(p.a, p.b, p.c, p.q, p.r, 50.0, 225.0, idx, obs, impl=impl),
            number=1, repeat=args.repeat,
        )
        ric = timeit.repeat(
            lambda: kernels.riccati_fixed_point(p.a, p.q, info, 0.0, 0.0, 200_000, impl=impl),
            number=1, repeat=args.repeat,
        )
        results[name] = (min(scan), min(ric))
        print(f"{name:>7}: filter_scan {args.runs}x{args.steps} {min(scan) * 1e3:9.2f} ms | "
              f"riccati 2e5 iterations {min(ric) * 1e3:8.2f} ms")
    if len(results) == 2:
        (ps, pr), (cs, cr) = results["python"], results["cython"]
        print(f"speedup: filter_scan x{ps / cs:.0f}, riccati x{pr / cr:.0f}")


if __name__ == "__main__":
    main()

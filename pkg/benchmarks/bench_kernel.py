"""Time the compiled kernel against the pure-Python fallback.

    python3 benchmarks/bench_kernel.py [--repeat N]
"""
from __future__ import annotations

import argparse
import statistics
import time

from rcc5 import kernel
from rcc5.clone import (AND, BASIC, all_binary_unions, behaviour_problem,
                        restrict_cyclic_rho, restrict_eta, restrict_wnu)


def workloads():
    p = behaviour_problem(BASIC, 2)
    restrict_eta(p, AND)
    yield "wedge search (basic)", p
    p = behaviour_problem(all_binary_unions(), 2)
    restrict_eta(p, AND)
    yield "wedge refutation (unions)", p
    p = behaviour_problem(BASIC, 3)
    restrict_cyclic_rho(p)
    yield "cyclic-rho search", p
    p = behaviour_problem(BASIC, 3, ordered=False)
    restrict_wnu(p)
    yield "WNU3 search (unordered)", p


def timed(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernel.get("cython")
    except ImportError:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    print(f"{'workload':30s} {'python':>10s} {'cython':>10s} {'speedup':>8s} nodes")
    for name, prob in workloads():
        prob.frozen()
        tp, rp = timed(lambda: kernel.search(prob, impl="python"), args.repeat)
        tc, rc = timed(lambda: kernel.search(prob, impl="cython"), args.repeat)
        assert rp == rc, f"{name}: kernels disagree"
        print(f"{name:30s} {tp:9.3f}s {tc:9.4f}s {tp / tc:7.0f}x {rc[1]}")


if __name__ == "__main__":
    main()

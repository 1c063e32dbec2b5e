"""Compare the compiled and pure-Python integration kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N] [--t-final T]

Both backends integrate the same trajectories; the script checks that their
outputs are bit-identical and reports the median wall time per run.
"""

import argparse
import json
import statistics
import sys
import time

import numpy as np

from robe3bp import kernels
from robe3bp.dynamics import integrate, variational_integrate
from robe3bp.model import make_params
from robe3bp.stability import assess

CASES = {
    "orbit": (make_params(0.05, 0.01, 0.05), [0.15, 0.0, 0.05, 0.0, 0.3, 0.0]),
    "near_m2": (make_params(0.3, 0.0, 0.02), [0.55, 0.0, 0.0, 0.0, 0.45, 0.0]),
}


def _time(fn, repeat):
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def run(repeat, t_final, tol):
    if kernels.BACKEND != "cython":
        print("compiled backend unavailable; nothing to compare", file=sys.stderr)
        return []
    rows = []
    for name, (params, state0) in CASES.items():
        timings, outputs = {}, {}
        for backend in ("python", "cython"):
            timings[backend], outputs[backend] = _time(
                lambda: integrate(state0, params, t_final, tol, backend=backend), repeat)
        a, b = outputs["python"], outputs["cython"]
        rows.append({
            "case": name,
            "steps": b.n_accept,
            "python_s": timings["python"],
            "cython_s": timings["cython"],
            "speedup": timings["python"] / timings["cython"],
            "identical": bool(np.array_equal(a.states, b.states)),
        })

    params = make_params(0.05, 0.0, 0.01)
    _, rep = assess(params)
    pert = [1e-6, 0.0, 1e-6, 0.0, 0.0, 0.0]
    timings, outputs = {}, {}
    for backend in ("python", "cython"):
        timings[backend], outputs[backend] = _time(
            lambda: variational_integrate(pert, rep.linearization, t_final=t_final, tol=tol,
                                          backend=backend), repeat)
    rows.append({
        "case": "variational",
        "steps": len(outputs["cython"][0]) - 1,
        "python_s": timings["python"],
        "cython_s": timings["cython"],
        "speedup": timings["python"] / timings["cython"],
        "identical": bool(np.array_equal(outputs["python"][1], outputs["cython"][1])),
    })
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--t-final", type=float, default=100.0)
    parser.add_argument("--tol", type=float, default=1e-12)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)
    rows = run(args.repeat, args.t_final, args.tol)
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'case':<12} {'steps':>7} {'python [s]':>11} {'cython [s]':>11} "
              f"{'speedup':>8}  identical")
        for r in rows:
            print(f"{r['case']:<12} {r['steps']:>7} {r['python_s']:>11.4f} {r['cython_s']:>11.5f} "
                  f"{r['speedup']:>7.1f}x  {r['identical']}")
    return 0 if all(r["identical"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())

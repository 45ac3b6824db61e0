"""Timing comparison of the compiled and numpy kernel backends.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--n 2000000] [--repeat 5]

The hot loop of every higher-level routine funnels into these kernels
(transcendental root solve per point, distance evaluations, Jacobian
scans), so this is the whole performance story of the package. The numpy
backend pays for full-array bisection sweeps (every iteration touches all
elements); the compiled backend bisects each element adaptively.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from heisgeo._kernels import available_backends, get_backend


def bench(fn, args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    ratio = 10.0 ** rng.uniform(-3, 9, args.n)
    z2 = rng.uniform(1e-6, 4.0, args.n)
    t = rng.uniform(-3.0, 3.0, args.n)
    tau = rng.uniform(0.0, 2.0 * np.pi, args.n)
    phi = rng.uniform(0.1, 2.0, args.n)
    rho = rng.uniform(0.1, 2.0, args.n)

    cases = [
        ("solve_tau", "solve_tau", (ratio,)),
        ("cc_norm", "cc_norm", (z2, t)),
        ("contract_jacobian", "contract_jacobian", (tau, 0.5)),
        ("chart_jacobian", "chart_jacobian", (phi, rho)),
        ("f_tau", "f_tau", (tau,)),
    ]

    names = available_backends()
    print(f"n = {args.n}, best of {args.repeat} runs; times in ms")
    header = f"{'kernel':<20}" + "".join(f"{n:>12}" for n in names)
    if set(names) >= {"compiled", "numpy"}:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, attr, fargs in cases:
        times = {}
        for name in names:
            backend = get_backend(name)
            fn = getattr(backend, attr)
            fn(*(a[:1000] if isinstance(a, np.ndarray) else a for a in fargs))
            times[name] = bench(fn, fargs, args.repeat)
        row = f"{label:<20}" + "".join(f"{1e3 * times[n]:>12.1f}" for n in names)
        if "compiled" in times and "numpy" in times:
            row += f"{times['numpy'] / times['compiled']:>9.1f}x"
        print(row)

    # agreement spot check, so the speed table cannot hide a divergence
    if len(names) > 1:
        ref = get_backend(names[0]).solve_tau(ratio[:10000])
        for name in names[1:]:
            alt = get_backend(name).solve_tau(ratio[:10000])
            print(f"max |solve_tau({names[0]}) - solve_tau({name})| = "
                  f"{np.abs(ref - alt).max():.3e}")


if __name__ == "__main__":
    main()

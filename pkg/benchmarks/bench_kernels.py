"""Compare the compiled and pure-Python kernel backends.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N]``. Prints the best
time per call for each kernel and backend, plus one full solver step.
"""

import argparse
import timeit

import numpy as np

from chemofront import kernels
from chemofront.grid import make_grid
from chemofront.params import CoefficientField, ModelParams
from chemofront.stepper import StepConfig, initial_state, step


def kernel_cases(n):
    rng = np.random.default_rng(0)
    lower = -np.ones(n)
    upper = -np.ones(n)
    diag = 2.5 + rng.uniform(size=n)
    rhs = rng.normal(size=n)
    u = rng.uniform(size=n)
    vel = rng.normal(size=n - 1)
    inv_vol = np.full(n, 10.0)
    stages = 1.0 + 0.5 * rng.uniform(size=(10_000, 3))
    return {
        "solve_tridiagonal": lambda m: m.solve_tridiagonal(lower, diag, upper, rhs),
        "upwind_divergence": lambda m: m.upwind_divergence(u, vel, inv_vol),
        "logistic_rk4 (1e4 steps)": lambda m: m.logistic_rk4(0.5, stages, stages, 1e-4),
    }


def best(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=401)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(sorted(backends))} (default {kernels.BACKEND}); nodes = {args.nodes}")
    rows = []
    for name, fn in kernel_cases(args.nodes).items():
        rows.append((name, {b: best(lambda m=m: fn(m), args.repeat) for b, m in backends.items()}))

    # one whole solver step with the default backend swapped in turn
    grid = make_grid("half_line", 40.0, args.nodes - 1)
    p = ModelParams(chi1=0.5, chi2=0.2, lambda1=1.0, lambda2=2.0, mu1=1.0, mu2=1.0)
    coeffs = CoefficientField.constant(1.0, 1.0)
    state = initial_state(grid, 1.0 + np.exp(-grid.x), p)
    cfg = StepConfig()
    saved = {k: getattr(kernels, k) for k in ("solve_tridiagonal", "upwind_divergence", "logistic_rk4")}
    timings = {}
    for b, m in backends.items():
        for k in saved:
            setattr(kernels, k, getattr(m, k))
        timings[b] = best(lambda: step(grid, state, coeffs, p, cfg), args.repeat)
    for k, v in saved.items():
        setattr(kernels, k, v)
    rows.append(("full step (IMEX, RK4 reaction)", timings))

    names = sorted(backends)
    print(f"{'kernel':34s}" + "".join(f"{n:>14s}" for n in names) + ("   speed-up" if len(names) == 2 else ""))
    for name, t in rows:
        line = f"{name:34s}" + "".join(f"{t[n] * 1e6:12.1f}us" for n in names)
        if len(names) == 2:
            line += f"   {t['python'] / t['cython']:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()

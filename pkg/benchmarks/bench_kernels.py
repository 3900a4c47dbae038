#!/usr/bin/env python3
"""Compare the pure-NumPy and compiled simulation lanes.

First asserts that both lanes produce bit-identical paths for both
schemes (the package-level guarantee that makes the lane choice
invisible), then prints a timing table.

Run from anywhere after installing the package:

    python3 benchmarks/bench_kernels.py
"""

import sys
import time

import numpy as np

MODEL = dict(
    a=2.0,
    b=1.0,
    m=np.array([0.5, -0.25]),
    kappa=np.array([0.5, 0.1]),
    theta=np.array([[1.2, 0.2], [0.0, 1.5]]),
    rho=np.array([[1.0, 0.0, 0.0], [0.3, 0.9, 0.0], [-0.2, 0.1, 0.8]]),
    y0=1.0,
    x0=np.array([0.0, 0.5]),
)


def _run(module, scheme_fn, n_paths, n_steps, dt, seed=2024):
    dts = np.full(n_steps, dt)
    fn = getattr(module, scheme_fn)
    return fn(
        MODEL["a"], MODEL["b"], MODEL["m"], MODEL["kappa"], MODEL["theta"],
        MODEL["rho"], MODEL["y0"], MODEL["x0"], dts, seed, 0, n_paths,
    )


def _best_time(module, scheme_fn, n_paths, n_steps, dt, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        _run(module, scheme_fn, n_paths, n_steps, dt)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    from adkit._kernels import _ref

    try:
        from adkit._kernels import _fast
    except ImportError:
        print("compiled lane is not importable; build the extension first", file=sys.stderr)
        return 1

    print("bit-identity check (8 paths x 2000 steps, dt=5e-3, n=2, general rho)")
    for scheme_fn in ("euler_paths", "exact_cir_paths"):
        y_ref, x_ref = _run(_ref, scheme_fn, 8, 2000, 5e-3)
        y_fast, x_fast = _run(_fast, scheme_fn, 8, 2000, 5e-3)
        identical = np.array_equal(y_ref, y_fast) and np.array_equal(x_ref, x_fast)
        print(f"  {scheme_fn:17s} bit-identical: {identical}")
        if not identical:
            print("FAILED: lanes disagree", file=sys.stderr)
            return 1

    cases = [
        ("euler_paths", 64, 20000, 5e-4),
        ("exact_cir_paths", 64, 5000, 2e-3),
    ]
    print()
    print(f"{'scheme':17s} {'paths':>6s} {'steps':>7s} {'numpy [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s}")
    for scheme_fn, n_paths, n_steps, dt in cases:
        t_ref = _best_time(_ref, scheme_fn, n_paths, n_steps, dt)
        t_fast = _best_time(_fast, scheme_fn, n_paths, n_steps, dt)
        print(
            f"{scheme_fn:17s} {n_paths:6d} {n_steps:7d} {t_ref:10.3f} {t_fast:13.3f} "
            f"{t_ref / t_fast:7.1f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

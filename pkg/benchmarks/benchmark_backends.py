"""Compare the compiled kernels against the NumPy fallback on the hot loops.

Usage: python benchmarks/benchmark_backends.py [--quick]

Times the per-point quasi-norm root finder and the uncentered ball-average
scans (the inner loops behind every norm field and maximal operator) and
prints a speedup table.  Both backends share semantics bit-for-bit modulo
rounding, so this is a pure performance comparison.
"""

import argparse
import time

import numpy as np

from herzkit import _kernels_py

try:
    from herzkit import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_quasi_norm(n_points):
    rng = np.random.default_rng(0)
    pts = rng.uniform(-10, 10, size=(n_points, 2))
    a = np.array([2.0, 1.3])
    cases = {"python": lambda: _kernels_py.quasi_norm_points(pts, a, 1e-12)}
    if _kernels_c is not None:
        cases["compiled"] = lambda: _kernels_c.quasi_norm_points(pts, a, 1e-12)
    return {name: best_of(fn) for name, fn in cases.items()}


def bench_maximal_2d(n_side, stride):
    rng = np.random.default_rng(1)
    absf = np.abs(rng.normal(size=(n_side, n_side)))
    h = 8.0 / (n_side - 1)
    radii = h * 2.0 ** np.arange(0, 8)
    semi0 = radii**2.0
    semi1 = radii

    def run(mod):
        out = absf.copy()
        mod.maximal_scan_2d(absf, h, h, semi0, semi1, stride, stride, 1.0, False, out)
        return out

    cases = {"python": lambda: run(_kernels_py)}
    if _kernels_c is not None:
        cases["compiled"] = lambda: run(_kernels_c)
    return {name: best_of(fn) for name, fn in cases.items()}


def bench_maximal_1d(n):
    rng = np.random.default_rng(2)
    absf = np.abs(rng.normal(size=n))
    h = 16.0 / (n - 1)
    radii = h * 2.0 ** np.arange(0, 12)

    def run(mod):
        out = absf.copy()
        mod.maximal_scan_1d(absf, h, radii, 1, 1.0, False, out)
        return out

    cases = {"python": lambda: run(_kernels_py)}
    if _kernels_c is not None:
        cases["compiled"] = lambda: run(_kernels_c)
    return {name: best_of(fn) for name, fn in cases.items()}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = ap.parse_args()

    qn_points = 20_000 if args.quick else 200_000
    side = 65 if args.quick else 129

    rows = [
        (f"quasi-norm roots, {qn_points} points (n=2)", bench_quasi_norm(qn_points)),
        (f"maximal scan 1D, 4097 points, 12 radii", bench_maximal_1d(4097)),
        (f"maximal scan 2D, {side}x{side}, stride 2, 8 radii", bench_maximal_2d(side, 2)),
    ]

    if _kernels_c is None:
        print("compiled extension not built; showing fallback timings only\n")
    width = max(len(r[0]) for r in rows) + 2
    print(f"{'kernel':<{width}} {'python':>10} {'compiled':>10} {'speedup':>9}")
    for label, res in rows:
        py = res["python"]
        if "compiled" in res:
            cc = res["compiled"]
            print(f"{label:<{width}} {py:>9.4f}s {cc:>9.4f}s {py / cc:>8.1f}x")
        else:
            print(f"{label:<{width}} {py:>9.4f}s {'-':>10} {'-':>9}")


if __name__ == "__main__":
    main()

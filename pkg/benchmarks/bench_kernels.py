"""Compare the numpy and compiled pair kernels.

    python3 benchmarks/bench_kernels.py --sizes 32 64 128 --repeat 20

Prints the median time per call for each kernel and backend, the speedup,
and the largest relative disagreement between the two backends.
"""
import argparse
import statistics
import time

import numpy as np

from fglap import build_grid, kernels, power, powersum
from fglap.operators import interior_operator


def _median_time(fn, repeat):
    fn()  # warm caches (pair geometry, scaled weights)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _cases(F, grid, s, u, v):
    P = grid.star_pairs

    def grad():
        out = np.zeros(grid.n_nodes)
        kernels.gradient(F, u, P, s, out)
        return out

    return {
        "modular": lambda: kernels.modular(F, u, P, s),
        "gradient": grad,
        "pairing": lambda: kernels.pairing(F, u, v, P, s),
        "row_flux": lambda: interior_operator(F, grid, u, s),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--s", type=float, default=0.5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is available")
    families = {"t^2": power(2.0), "t^2+t^4": powersum([[1.0, 2.0], [1.0, 4.0]]),
                "t^2+t^2.5": powersum([[1.0, 2.0], [0.5, 2.5]])}
    header = f"{'G':<10} {'N':>5} {'pairs':>8} {'kernel':<9}" + "".join(f" {b + ' ms':>11}" for b in backends)
    if len(backends) > 1:
        header += f" {'speedup':>8} {'max rel diff':>13}"
    print(header)
    print("-" * len(header))
    previous = kernels.BACKEND
    rng = np.random.default_rng(0)
    try:
        for name, F in families.items():
            for n in args.sizes:
                grid = build_grid(-1.0, 1.0, n, 4.0)
                u = rng.normal(size=grid.n_nodes)
                v = rng.normal(size=grid.n_nodes)
                timings, values = {}, {}
                for b in backends:
                    kernels.use_backend(b)
                    for kname, fn in _cases(F, grid, args.s, u, v).items():
                        timings[b, kname] = _median_time(fn, args.repeat)
                        values[b, kname] = np.atleast_1d(fn())
                for kname in ("modular", "gradient", "pairing", "row_flux"):
                    line = f"{name:<10} {n:>5} {len(grid.star_pairs):>8} {kname:<9}"
                    line += "".join(f" {1e3 * timings[b, kname]:>11.3f}" for b in backends)
                    if len(backends) > 1:
                        ref, fast = values["numpy", kname], values["cython", kname]
                        diff = float(np.max(np.abs(fast - ref)) / max(np.max(np.abs(ref)), 1e-300))
                        speed = timings["numpy", kname] / timings["cython", kname]
                        line += f" {speed:>7.1f}x {diff:>13.2e}"
                    print(line)
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()

"""Compare the compiled and numpy step kernels.

Usage: python benchmarks/bench_kernels.py [--nodes 161 321] [--repeat 50]
"""
import argparse
import time

import numpy as np

from obstacle_mcf import kernels
from obstacle_mcf.grid import Grid
from obstacle_mcf.initial_data import Sphere, build_initial_field


def _time(fn, repeat):
    fn()  # warm-up
    best = float("inf")
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[161, 321])
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args(argv)
    eps = 0.05
    backends = ["numpy"] + (["cython"] if kernels.compiled_available() else [])
    print(f"{'kernel':<12}{'nodes':>8}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for n in args.nodes:
        g = Grid.cube(2, n, 2.0)
        phi = build_initial_field(g, Sphere((0.0, 0.0), 0.5), eps, eps**2)
        out = np.empty_like(phi)
        dt = 1e-6
        cases = {
            "yosida": lambda b: kernels.yosida_step(phi, g.h, dt, eps, eps**2, out=out, backend=b),
            "projection": lambda b: kernels.projection_step(np.clip(phi, -1, 1), g.h, dt, eps, out=out, backend=b),
            "laplacian": lambda b: kernels.laplacian(phi, g.h, backend=b),
        }
        for name, call in cases.items():
            ts = [_time(lambda: call(b), args.repeat) for b in backends]
            speed = f"{ts[0] / ts[-1]:>9.1f}x" if len(ts) > 1 else f"{'n/a':>10}"
            print(f"{name:<12}{n:>8}" + "".join(f"{1e3 * t:>14.3f}" for t in ts) + speed)


if __name__ == "__main__":
    main()

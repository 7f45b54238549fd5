"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from varalg._kernels import available_backends


def _spd(rng, n):
    M = rng.standard_normal((n, n))
    return M @ M.T + n * np.eye(n)


def _field(rng, steps):
    x = np.linspace(-3.0, 3.0, steps)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return np.abs(np.sin(3 * X) * np.cos(2 * Y)) + 1e-3 * rng.random((steps, steps))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = [("jacobi_eigh n=%d" % n, "jacobi_eigh", (_spd(rng, n),)) for n in (8, 32, 64)]
    cases += [("grid_local_minima %dx%d" % (s, s), "grid_local_minima", (_field(rng, s), 0.1)) for s in (101, 401)]
    backends = available_backends()
    names = sorted(backends)
    print("%-28s" % "kernel" + "".join("%14s" % b for b in names) + ("%10s" % "speedup" if len(names) > 1 else ""))
    for label, fn, call_args in cases:
        times = {}
        for b in names:
            f = getattr(backends[b], fn)
            f(*call_args)
            times[b] = min(timeit.repeat(lambda: f(*call_args), number=1, repeat=args.repeat))
        row = "%-28s" % label + "".join("%12.2fms" % (1e3 * times[b]) for b in names)
        if len(names) > 1:
            row += "%9.1fx" % (times["python"] / times["cython"])
        print(row)
    if len(names) == 1:
        print("compiled extension not built; only the Python backend was timed")


if __name__ == "__main__":
    main()

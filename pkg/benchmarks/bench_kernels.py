"""Compiled vs pure-Python RK4 kernels.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]

Times both backends on the same sampled sech^2 profile, reports the speedup
and the largest difference between their outputs.
"""

import argparse
import timeit

import numpy as np

from paramdrive import FrequencyProfile
from paramdrive import kernels
from paramdrive.profiles import TimeGrid


def scalar_case(steps):
    prof = FrequencyProfile.sech(6 * np.pi, 1.0, 0.5)
    g = TimeGrid(-15.0, 15.0, steps)
    w2 = np.ascontiguousarray(prof.omega_squared(g.half_times()))
    y0 = np.exp(-1j * prof.omega0 * g.t_min)
    return (w2, g.h, y0, -1j * prof.omega0 * y0)


def matrix_case(steps, n=4):
    rng = np.random.default_rng(0)
    K = rng.normal(size=(n, n))
    K = 0.1 * (K + K.T) + np.diag(np.linspace(1.0, 2.0, n) ** 2)
    w2 = np.ascontiguousarray(np.repeat(K[None], 2 * steps + 1, axis=0))
    return (w2, 0.01, np.eye(n, dtype=complex), -1j * np.eye(n, dtype=complex))


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    found = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(found)}")
    for label, idx, case in (("rk4_scalar", 0, scalar_case(args.steps)),
                             ("rk4_matrix n=4", 1, matrix_case(args.steps // 20))):
        times, outs = {}, {}
        for name, fns in found.items():
            times[name] = bench(fns[idx], case, args.repeat)
            outs[name] = fns[idx](*case)
        line = ", ".join(f"{k} {v * 1e3:.1f} ms" for k, v in times.items())
        if "compiled" in times:
            diff = max(float(np.max(np.abs(a - b))) for a, b in zip(outs["compiled"], outs["python"]))
            line += f"; speedup x{times['python'] / times['compiled']:.1f}; max |diff| {diff:.1e}"
        print(f"{label:16s} {line}")


if __name__ == "__main__":
    main()

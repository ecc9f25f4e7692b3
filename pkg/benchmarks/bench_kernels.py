"""Time the numba kernels against their numpy fallbacks on random tables.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from cubeid import kernels


def cases(n, rng):
    fa = rng.integers(0, n // 4, n)
    gb = rng.integers(0, n // 4, n)
    a = rng.integers(0, n, n)
    b = rng.integers(0, n, n)
    return {
        "join_codes": (fa, gb),
        "union_find": (n, a, b),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)
    print(f"jit enabled: {kernels.USE_JIT}")
    for name, arg in cases(args.size, rng).items():
        jit, ref = getattr(kernels, name), kernels.numpy_kernels[name]
        jit(*arg)  # compile outside the timing
        tj = min(timeit.repeat(lambda: jit(*arg), number=1, repeat=args.repeat))
        tn = min(timeit.repeat(lambda: ref(*arg), number=1, repeat=args.repeat))
        print(f"{name:12s} jit {tj * 1e3:8.2f} ms   numpy {tn * 1e3:8.2f} ms")


if __name__ == "__main__":
    main()

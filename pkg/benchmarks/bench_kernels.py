"""Time the numba and numpy backends on the three hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 1000000]

Each kernel runs once untimed per backend (numba compiles or loads its
cache there), then ``--repeat`` times; the best time is reported. Outputs
of the two backends are compared for equality.
"""

import argparse
import time

import numpy as np

from planckdecomp import ModeParams
from planckdecomp import sampling as smp
from planckdecomp import thermodynamics as thd
from planckdecomp._kernels import HAVE_NUMBA


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(size):
    p = ModeParams(0.1)
    rs = smp.RandomStream(42, 0)
    levels = (1.0, 2.0, 3.0, 4.0)
    start = thd.fermi_occupations(levels, 1.0) + 0.01 * np.array([1.0, -1.0, -1.0, 1.0])
    ks = thd.KineticSystem(levels, 1.0, ((0, 3, 1, 2),), tuple(start))
    return {
        # Poisson inversion over all multiplet components at small beta
        "inversion_search": lambda be: smp.sample_multiplet_sum(p, size, rs, backend=be).values,
        "dyadic_bits": lambda be: smp.sample_coupled(p, size, rs, backend=be).bits,
        "kinetic_walk": lambda be: thd.kinetic_relaxation(ks, size, smp.RandomStream(42, 1000), 10_000,
                                                          backend=be).occupations,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=10**6)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  equal")
    for name, run in cases(args.size).items():
        t_nb = best_of(lambda: run("numba"), args.repeat)
        t_np = best_of(lambda: run("numpy"), args.repeat)
        same = np.array_equal(run("numba"), run("numpy"))
        print(f"{name:<18}{t_nb:>10.4f}{t_np:>10.4f}{t_np / t_nb:>8.1f}x  {same}")


if __name__ == "__main__":
    main()

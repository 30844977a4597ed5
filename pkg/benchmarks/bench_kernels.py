"""Time the compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  Prints the median wall
time of each kernel per backend and the speedup of the compiled one.
"""

import argparse
import timeit

import numpy as np

from numeraire import kernels


def random_instance(rng, n, m):
    P = rng.dirichlet(np.ones(m), size=n)
    q = rng.dirichlet(np.ones(m))
    return P, q


def cases(rng):
    P, q = random_instance(rng, 8, 200)
    lam = np.full(8, 1 / 8)
    yield "em_steps n=8 m=200 steps=2000", lambda b: b.em_steps(P, q, lam, 2000, 0.0)
    P, q = random_instance(rng, 3, 50)
    yield "simplex_grid_search n=3 K=200", lambda b: b.simplex_grid_search(P, q, 200)
    P, q = random_instance(rng, 4, 20)
    yield "simplex_grid_search n=4 K=60", lambda b: b.simplex_grid_search(P, q, 60)


def median_time(fn, repeat):
    return float(np.median(timeit.repeat(fn, number=1, repeat=repeat)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled backend unavailable; timing the numpy fallback only")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<34}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, call in cases(rng):
        t_py = median_time(lambda: call(kernels.python_backend), args.repeat)
        if kernels.compiled_backend is None:
            print(f"{name:<34}{t_py:>12.4f}{'n/a':>12}{'n/a':>10}")
            continue
        t_c = median_time(lambda: call(kernels.compiled_backend), args.repeat)
        print(f"{name:<34}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()

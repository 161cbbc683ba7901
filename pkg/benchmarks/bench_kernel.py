"""Wall-clock comparison of the pure and compiled count_clauses kernels.

Run as a script:

    python3 benchmarks/bench_kernel.py [--repeat N] [--seed S]

Three workloads: random weighted 3-clause sets, a permutation-matrix
encoding whose model count is n!, and a cancellation-heavy weighted
instance.  Each is timed best-of-N per kernel.
"""

import argparse
import random
import time

from cofola.backend import _pykernel

try:
    from cofola.backend import _speed
except ImportError:
    _speed = None

ONE = {(): 1}


def random_weighted(rng, n_atoms=16, n_clauses=44):
    clauses = [
        tuple(rng.choice((1, -1)) * rng.randint(1, n_atoms)
              for _ in range(3))
        for _ in range(n_clauses)
    ]
    weights = []
    for atom in range(n_atoms):
        if atom % 2:
            weights.append(({((f"w{atom % 5}", 1),): 1}, ONE))
        else:
            weights.append((ONE, ONE))
    return n_atoms, clauses, weights, {}


def permutation_matrix(n=6):
    """Atoms x[i][j]; exactly one per row, at most one per column: n! models."""
    atom = lambda i, j: i * n + j + 1
    clauses = []
    for i in range(n):
        clauses.append(tuple(atom(i, j) for j in range(n)))
        for j in range(n):
            for k in range(j + 1, n):
                clauses.append((-atom(i, j), -atom(i, k)))
                clauses.append((-atom(j, i), -atom(k, i)))
    return n * n, clauses, [(ONE, ONE)] * (n * n), {}


def cancellation(n_atoms=14):
    plus = {(): 1, (("x", 1),): 1}
    minus = {(): 1, (("x", 1),): -1}
    weights = [(plus, minus) if a % 2 else (minus, plus)
               for a in range(n_atoms)]
    clauses = [(a, a + 1) for a in range(1, n_atoms)]
    return n_atoms, clauses, weights, {}


def best_of(fn, args, repeat):
    best = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        dt = time.perf_counter() - t0
        best = dt if best is None else min(best, dt)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=20260817)
    opts = parser.parse_args()

    rng = random.Random(opts.seed)
    workloads = [
        ("random weighted 3-cnf", random_weighted(rng)),
        ("permutation matrix 6x6", permutation_matrix()),
        ("cancellation chain", cancellation()),
    ]

    print(f"{'workload':<26} {'pure (s)':>10} {'speed (s)':>10} {'ratio':>7}")
    for name, args in workloads:
        t_pure, r_pure = best_of(_pykernel.count_clauses, args, opts.repeat)
        if _speed is None:
            print(f"{name:<26} {t_pure:>10.4f} {'n/a':>10} {'n/a':>7}")
            continue
        t_fast, r_fast = best_of(_speed.count_clauses, args, opts.repeat)
        assert r_pure == r_fast, f"kernel disagreement on {name}"
        print(f"{name:<26} {t_pure:>10.4f} {t_fast:>10.4f} "
              f"{t_pure / t_fast:>6.1f}x")
    if _speed is None:
        print("compiled kernel not built; install with a C compiler to "
              "compare")


if __name__ == "__main__":
    main()

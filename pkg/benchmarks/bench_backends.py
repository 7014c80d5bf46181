"""Compiled versus numpy kernels, and the three stiffness routes.

    python3 benchmarks/bench_backends.py [--iterations N] [--trials N] [--seed N]

Timings are informational; the deviation column must stay below 1e-9.
"""
import argparse

from stiffkit import kernels
from stiffkit.bench import bench_kernels, bench_methods


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--iterations", type=int, default=20000)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    print(f"backends: {', '.join(kernels.available())} (active: {kernels.BACKEND})\n")
    per = {}
    for name, backend, ns in bench_kernels(args.iterations, args.seed):
        per.setdefault(name, {})[backend] = ns
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in kernels.available()) + f"{'speedup':>10}")
    for name, row in per.items():
        speed = row["python"] / row["cython"] if "cython" in row else float("nan")
        print(f"{name:<22}" + "".join(f"{row[b] / 1e3:>10.2f}us" for b in kernels.available())
              + f"{speed:>9.1f}x")

    print(f"\n{'n_springs':>9} {'n_passive':>9} {'method':>10} {'backend':>8} {'median':>10} {'max dev':>9}")
    for n_springs, n_passive in [(6, 1), (12, 3), (24, 5), (36, 5)]:
        for r in bench_methods(n_springs, n_passive, args.trials, args.seed, compare_backends=True):
            print(f"{r.n_springs:>9} {r.n_passive:>9} {r.method:>10} {r.backend:>8} "
                  f"{r.median_ns / 1e3:>8.1f}us {r.max_deviation:>9.1e}")


if __name__ == "__main__":
    main()

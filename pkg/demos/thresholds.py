"""BP thresholds of doped spatially-coupled ensembles over the BEC.

Bisects density evolution for a handful of doping patterns of the (5,10)
chain and prints how the threshold grows as doping approaches full
termination.  Runs in about a minute; shrink --L or loosen --tol to go
faster at the cost of some accuracy.
"""

import argparse
import time

from scldpc import DopingPattern, EnsembleSpec, find_threshold

PATTERNS = [
    ("undoped", DopingPattern()),
    ("{0}", DopingPattern((0,))),
    ("{0,1}", DopingPattern((0, 1))),
    ("{0,1,2}", DopingPattern((0, 1, 2))),
    ("{0,2,4}", DopingPattern((0, 2, 4))),
    ("soft 3x0.75 + 2x0.2", DopingPattern((0, 1, 2, 3, 4),
                                          (0.75, 0.2, 0.75, 0.2, 0.75))),
    ("{0,1,2,3}", DopingPattern((0, 1, 2, 3))),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=50)
    ap.add_argument("--tol", type=float, default=1e-4)
    args = ap.parse_args()

    print(f"(5,10) tail-biting chain, L={args.L}, bisection tol={args.tol:g}")
    print(f"{'pattern':>22}  {'threshold':>9}  {'DE iters':>9}  {'secs':>6}")
    for name, pattern in PATTERNS:
        spec = EnsembleSpec(5, 10, args.L, 1000, "tail-biting", pattern)
        t0 = time.time()
        res = find_threshold(spec, tol=args.tol)
        print(f"{name:>22}  {res.epsilon_star:9.5f}  {res.iterations_used:9d}"
              f"  {time.time() - t0:6.1f}")

    term = EnsembleSpec(5, 10, args.L, 1000, "terminated")
    res = find_threshold(term, tol=args.tol)
    print(f"{'terminated (ref)':>22}  {res.epsilon_star:9.5f}"
          f"  {res.iterations_used:9d}")
    print("\nNote how {0,1,2,3} -- four consecutive hard-doped positions, i.e.")
    print("dv-1 of them -- reproduces the terminated threshold: doping that")
    print("cluster is exactly a termination spliced into the chain.")


if __name__ == "__main__":
    main()

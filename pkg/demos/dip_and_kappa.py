"""The degree-one dip of a doped chain and the scaling constant kappa.

Simulates peeling on a terminated chain with a hard-doped cluster in the
middle and averages the number of degree-one check nodes over trials.  Two
waves start at the terminated ends immediately; the doped cluster only
spawns its waves once the neighborhood has thinned out, so the average
trajectory dips before settling on the steady state.  The depth of that dip,
measured against the two termination waves alone,

    delta = S/(2N) - gamma * (eps_sc - eps) / 2,

shrinks linearly as the channel approaches the doped threshold; the slope is
kappa, the constant behind the doping-switch probability.

Default scale (N=2000, 30 trials/point) takes a few minutes and gives a
rough kappa; the quantitative runs in the test suite use N=10^4 and 200
trials.
"""

import argparse

import numpy as np

from scldpc import (DopingPattern, doped_chain_spec, estimate_kappa,
                    locate_dip, mean_trajectory)

EPS_STAR_D = 0.4783   # doped threshold of {0,1,2} on the (5,10) chain
EPS_STAR_SC = 0.4994  # terminated chain threshold


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pattern = DopingPattern((0, 1, 2))
    spec = doped_chain_spec(5, 10, args.N, pattern)

    # first, just look at one trajectory's dip
    eps = EPS_STAR_D - 0.015
    mt = mean_trajectory(spec, eps, args.trials, args.seed)
    dip = locate_dip(mt)
    print(f"eps={eps:.4f}: dip at iteration {dip.ell_star} "
          f"(of {len(mt.mean)}), mean degree-1 count S={dip.S:.1f}")
    # a crude sketch of the trajectory around the dip
    marks = np.linspace(0, len(mt.mean) - 1, 16, dtype=int)
    peak = mt.mean.max()
    for i in marks:
        bar = "#" * int(50 * mt.mean[i] / peak)
        tag = "  <-- dip" if abs(i - dip.ell_star) < len(mt.mean) / 32 else ""
        print(f"  iter {i:7d} |{bar}{tag}")

    print("\nfitting kappa on the near-threshold grid "
          "(this is the slow part)...")
    kappa, gamma, points, _ = estimate_kappa(
        5, 10, pattern, EPS_STAR_D, EPS_STAR_SC,
        N=args.N, trials=args.trials, seed=args.seed)
    for e, d in points:
        print(f"  eps={e:.4f}  delta={d:+.4f}")
    print(f"gamma={gamma:.3f}  kappa={kappa:.3f}  "
          f"(large-N reference for this pattern: 2.50)")


if __name__ == "__main__":
    main()

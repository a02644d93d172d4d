"""Compare the optimizer against both random-search oracles on random feasible instances."""

import argparse
import time

import numpy as np

from cantelli.blocker import ConeSlice
from cantelli.instances import random_feasible_instance
from cantelli.optimize import brute_force_lambda_inf, brute_force_search, minimize_over_region


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--max-dim", type=int, default=4)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    kinds = ("orthant", "polyhedral", "second_order")
    excess = undercut = lam_gap = 0.0
    start = time.perf_counter()
    for i in range(args.instances):
        inst = random_feasible_instance(rng, int(rng.integers(1, args.max_dim + 1)), kinds)
        R = ConeSlice(inst.cone.dual(), inst.b)
        opt = minimize_over_region(inst.sigma, R)
        bf = brute_force_search(inst.sigma, R, args.budget, seed=i)
        inf_f = brute_force_lambda_inf(inst.sigma, inst.b, inst.cone, args.budget, seed=i)
        excess = max(excess, bf.bound - opt.bound)
        undercut = max(undercut, opt.bound - bf.bound)
        lam_gap = max(lam_gap, abs(inf_f - opt.bound))
    print(f"instances={args.instances} budget={args.budget}")
    print(f"max brute-force excess   {excess:.3e}")
    print(f"max brute-force undercut {undercut:.3e}")
    print(f"max |inf f - min g|      {lam_gap:.3e}")
    print(f"time {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()

"""Gaussian Monte Carlo check that every emitted bound dominates the estimated tail."""

import argparse

import numpy as np

from cantelli import montecarlo as mc
from cantelli.bounds import tail_bound_cone, tail_bound_set
from cantelli.instances import random_feasible_instance, random_nonnegative_rows, random_pd


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    rng = np.random.default_rng(args.seed)
    failures = 0
    print(f"{'#':>3} {'kind':<8} {'n':>2} {'bound':>9} {'p_hat':>9} {'stderr':>9} check")
    for i in range(args.instances):
        n = int(rng.integers(1, 5))
        if i % 2:
            inst = random_feasible_instance(rng, n, ("orthant", "polyhedral", "second_order"))
            rep = tail_bound_cone(inst.sigma, inst.b, inst.cone)
            X = mc.sample_gaussian(inst.sigma, args.samples, args.seed + i)
            est = mc.estimate_tail(X, inst.b, inst.cone, args.seed + i)
            kind = inst.cone.kind
        else:
            A = random_nonnegative_rows(rng, n, int(rng.integers(1, 4)))
            S = random_pd(rng, n)
            rep = tail_bound_set(S, A)
            est = mc.estimate_set_tail(mc.sample_gaussian(S, args.samples, args.seed + i), A, args.seed + i)
            kind = "set"
        check = mc.check_bound(est, rep.bound)
        failures += check is mc.Check.FAIL
        print(f"{i:3d} {kind:<8} {n:2d} {rep.bound:9.5f} {est.p_hat:9.5f} {est.stderr:9.2e} {check.value}")
    print(f"failures: {failures}/{args.instances}")


if __name__ == "__main__":
    main()

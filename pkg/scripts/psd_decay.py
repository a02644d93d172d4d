"""Weakly spherical PSD-cone bound with threshold lambda*I: closed form vs the generic optimizer."""

import argparse

import numpy as np

from cantelli import linalg
from cantelli.bounds import psd_spherical_bound, tail_bound_cone
from cantelli.cones import PositiveSemidefinite


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--max-n", type=int, default=16)
    p.add_argument("--generic-up-to", type=int, default=4, help="run the optimizer for n up to this order")
    args = p.parse_args()

    print(f"{'n':>3} {'bound':>10} {'n*bound':>9} {'optimizer':>12}")
    for n in range(2, args.max_n + 1):
        B = args.lam * np.eye(n)
        closed = psd_spherical_bound(args.sigma2, B)
        generic = ""
        if n <= args.generic_up_to:
            C = PositiveSemidefinite(n)
            rep = tail_bound_cone(args.sigma2 * np.eye(C.dim), linalg.svec(B), C, use_closed_form=False)
            generic = f"{rep.bound:12.8f}"
        print(f"{n:3d} {closed:10.6f} {n * closed:9.5f} {generic}")


if __name__ == "__main__":
    main()

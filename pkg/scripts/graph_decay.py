"""n * bound for even cycles with a perfect matching, next to the printed constant."""

import argparse

from cantelli.bounds import cycle_graph, graph_matching_bound, perfect_matching_of_cycle


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--max-n", type=int, default=32)
    args = p.parse_args()

    print(f"{'n':>4} {'bound':>10} {'n*bound':>9} {'printed':>10}")
    for n in range(4, args.max_n + 1, 2):
        r = graph_matching_bound(cycle_graph(n), args.sigma2, perfect_matching_of_cycle(n))
        print(f"{n:4d} {r.bound:10.6f} {n * r.bound:9.5f} {r.diagnostics['printed_constant']:10.6f}")
    print(f"limit of n*bound: {4 * args.sigma2}")


if __name__ == "__main__":
    main()

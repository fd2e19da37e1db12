"""Sticky-walk table: mean absorption time over equal splits, with exact values where cheap."""

import argparse

from simplexwar.core import Composition, RunConfig
from simplexwar.sticky_walk import (
    SolverDidNotConverge,
    StateSpaceTooLarge,
    exact_expected_absorption,
    run_walk,
)

PAIRS = [(4, 2)] + [(32, m) for m in (2, 4, 8, 16)] + [(128, m) for m in (2, 4, 8, 16, 32, 64)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print("n,m,avg,std_error,avg_over_n_sq,exact")
    for n, m in PAIRS:
        cfg = RunConfig("sticky_walk", n, m, seed=args.seed, replications=args.reps, threads=args.threads)
        s = run_walk(cfg)
        try:
            exact = exact_expected_absorption(
                Composition.equal(n, m), 1e-9, max_states=2 * 10**5
            ).expected_time
            exact = f"{exact:.6f}"
        except (StateSpaceTooLarge, SolverDidNotConverge):
            exact = ""
        print(f"{n},{m},{s.mean_rounds:.3f},{s.std_error:.3f},{s.mean_rounds / n**2:.4f},{exact}")


if __name__ == "__main__":
    main()

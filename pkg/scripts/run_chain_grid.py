"""Simulated chain error against the exact bound over an (n, eps) grid."""

import argparse

from artifact.chain import chain_error_bound, simulate_chain
from artifact.core import derive_trial_seed


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    print("n,eps,exact,estimate,rel_err")
    grid = [(n, e) for n in (2, 5, 10, 15, 20) for e in (0.01, 0.03, 0.05, 0.1)]
    for idx, (n, eps) in enumerate(grid):
        r = simulate_chain(n, eps, 0, args.trials, derive_trial_seed(args.seed, idx), args.workers)
        exact = chain_error_bound(n, eps)
        print(f"{n},{eps},{exact:.6f},{r.estimate:.6f},{abs(r.estimate - exact) / exact:.4f}")


if __name__ == "__main__":
    main()

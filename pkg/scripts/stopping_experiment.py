"""Entropy stopping rule against the exact oracle on planted-gap chains."""

import argparse

from artifact.chain import (
    StoppingConfig,
    fixed_horizon_loss,
    planted_gap_chain,
    run_stopping,
    spectral_gap,
    stopping_oracle,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gamma", type=float, default=0.3)
    ap.add_argument("--lam", type=float, default=0.025)
    ap.add_argument("--chains", type=int, default=10)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    print("chain,gap,threshold,rule_loss,mean_tau,oracle,best_fixed")
    for i in range(args.chains):
        m = planted_gap_chain(args.gamma, seed=i)
        cfg = StoppingConfig(args.lam, spectral_gap(m))
        r = run_stopping(m, cfg, args.trials, seed=i, workers=args.workers)
        best = min(fixed_horizon_loss(m, args.lam, s) for s in range(0, 60))
        print(f"{i},{spectral_gap(m):.4f},{cfg.threshold:.4f},{r.mean_loss:.4f},"
              f"{r.mean_tau:.2f},{stopping_oracle(m, args.lam, 200):.4f},{best:.4f}")


if __name__ == "__main__":
    main()

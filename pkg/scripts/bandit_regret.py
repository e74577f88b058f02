"""LinUCB retrieval regret against its envelope over horizons."""

import argparse

from artifact.core import derive_trial_seed
from artifact.grounding import BanditEnv, regret_bound, run_bandit_seeds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--delta", type=float, default=0.05)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    seeds = [derive_trial_seed(12, i) for i in range(args.seeds)]
    print("T,mean_regret,max_regret,envelope")
    for T in (250, 1000, 4000):
        r = run_bandit_seeds(BanditEnv(horizon=T), args.delta, seeds, args.workers)
        print(f"{T},{r.mean():.2f},{r.max():.2f},{regret_bound(T, 4, args.delta):.1f}")


if __name__ == "__main__":
    main()

"""Selective verification loss against its closed form over the verification rate."""

import argparse

import numpy as np

from artifact.scenarios import data_path
from artifact.trust import (
    AgentModel,
    Marketplace,
    build_millipede,
    run_selective,
    selective_loss_closed_form,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.16)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    m = Marketplace.load(data_path("markets/substituting.yaml"))
    tree = build_millipede(m)
    print("alpha,loss,ci_low,ci_high,closed_form,exact_under_sim")
    for alpha in np.linspace(0, 1, 11):
        r = run_selective(m, tree, alpha, 128, args.trials, seed=15,
                          agents=AgentModel(args.eps), workers=args.workers)
        closed = selective_loss_closed_form(args.eps, alpha, 0.1, 128)
        exact = args.eps + (1 - args.eps) * (1 - alpha) * 0.1
        print(f"{alpha:.1f},{r.loss.estimate:.4f},{r.loss.ci_low:.4f},{r.loss.ci_high:.4f},"
              f"{closed:.4f},{exact:.4f}")


if __name__ == "__main__":
    main()

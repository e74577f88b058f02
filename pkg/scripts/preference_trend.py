"""Growth of Borda sample complexity in n, clean against adversarial noise."""

import argparse

from artifact.adaptation import PrefProblem, simulate_preference


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--gap", type=float, default=0.01)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=9)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    print("n,noise,median,walk_scale")
    med = {}
    for n in (10, 20):
        for noise, g in (("none", 0.0), ("benign", args.gamma), ("adversarial", args.gamma)):
            r = simulate_preference(PrefProblem(n, args.gap, g), noise, args.trials, args.seed,
                                    args.workers)
            med[n, noise] = r.report.estimate
            print(f"{n},{noise},{r.report.estimate:.0f},{r.walk_scale:.4g}")
    clean = med[20, "none"] / med[10, "none"]
    adv = med[20, "adversarial"] / med[10, "adversarial"]
    print(f"ratio clean {clean:.2f}, adversarial {adv:.2f}, ratio-of-ratios {adv / clean:.2f}")


if __name__ == "__main__":
    main()

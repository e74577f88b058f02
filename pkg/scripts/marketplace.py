"""Millipede trees on the shipped markets, played by agents of varying rationality."""

import argparse

from artifact.scenarios import DATA
from artifact.trust import (
    AgentModel,
    Marketplace,
    audit_tree,
    build_millipede,
    run_marketplace,
    vcg_counterexample,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    print("market,eps1,min_margin,welfare,violation_rate,ci_low,ci_high")
    for path in sorted((DATA / "markets").glob("*.yaml")):
        m = Marketplace.load(path)
        tree = build_millipede(m)
        audit = audit_tree(tree, m)
        for eps1 in (0.0, 0.112, 0.138, 0.193):
            r = run_marketplace(tree, m, AgentModel(eps1), args.trials, seed=1,
                                workers=args.workers)
            v = r.violation_rate
            print(f"{path.stem},{eps1},{audit.min_margin:.4f},{r.welfare.estimate:.4f},"
                  f"{v.estimate:.4f},{v.ci_low:.4f},{v.ci_high:.4f}")
    inst = vcg_counterexample({"a": 2.0, "b": 1.0}, {"a": 1.0, "b": 2.0}, 0.1)
    print(f"VCG misreport profit: {inst.deviation_profit!r}")


if __name__ == "__main__":
    main()

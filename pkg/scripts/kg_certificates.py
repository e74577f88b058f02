"""Certified radius and exhaustive flip search on the shipped KG fixtures."""

import argparse

from artifact.grounding import ToyKG, certified_radius, exact_vote_shares, radius_oracle
from artifact.scenarios import DATA


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.7)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    print("fixture,winner,p_A,radius,robust_at_radius,robust_at_radius_plus_1,flip")
    for path in sorted((DATA / "kg").iterdir()):
        kg = ToyKG.load(path)
        shares = exact_vote_shares(kg, ("h", "r"), args.p)
        winner = max(sorted(shares), key=shares.get)
        radius = certified_radius(shares[winner], args.p)
        at = radius_oracle(kg, ("h", "r"), args.p, radius, workers=args.workers)
        past = radius_oracle(kg, ("h", "r"), args.p, radius + 1, workers=args.workers)
        print(f"{path.stem},{winner},{shares[winner]:.4f},{radius},{at.robust},{past.robust},"
              f"\"{past.flip_edits}\"")


if __name__ == "__main__":
    main()

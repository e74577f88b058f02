"""Recursive Gaussian refitting: replacement against accumulation."""

import argparse

import numpy as np

from artifact.adaptation import CollapseConfig, quadratic_fit_r2, simulate_collapse


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    rep = simulate_collapse(CollapseConfig(args.dim, args.n, 100), 1, args.runs,
                            args.workers).mean(axis=0)
    T = np.arange(rep.size)
    a, r2 = quadratic_fit_r2(T[1:], rep[1:])
    print(f"replacement: KL ~ {a:.5f} T^2, R^2 = {r2:.4f}, KL(100) = {rep[-1]:.3f}")
    sup = {}
    for rho in (0.01, 0.05):
        kl = simulate_collapse(CollapseConfig(args.dim, args.n, 200, "Accumulation", rho), 1,
                               args.runs, args.workers).mean(axis=0)
        sup[rho] = kl.max()
        print(f"accumulation rho={rho}: KL(50) = {kl[50]:.3f}, KL(200) = {kl[200]:.3f}, "
              f"sup = {sup[rho]:.3f}")
    print(f"ceiling ratio rho 0.01 / 0.05 = {sup[0.01] / sup[0.05]:.2f}")


if __name__ == "__main__":
    main()

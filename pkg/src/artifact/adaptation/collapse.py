"""Model collapse under recursive retraining of a Gaussian generator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..core import check_probability, check_seed, parallel_map, trial_rng

RIDGE = 1e-9
COLLAPSE_C1 = 1.0 / (128.0 * math.pi)


class CollapseMode(str, enum.Enum):
    REPLACEMENT = "Replacement"
    ACCUMULATION = "Accumulation"


@dataclass(frozen=True)
class CollapseConfig:
    dim: int
    n_per_gen: int
    generations: int
    mode: CollapseMode = CollapseMode.REPLACEMENT
    rho: float = 0.0
    d_eff: float | None = None
    n0: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", CollapseMode(self.mode))
        if not 1 <= self.dim <= 64:
            raise ValueError("dim must lie in [1, 64]")
        if not 1 <= self.generations <= 200:
            raise ValueError("generations must lie in [1, 200]")
        if self.n_per_gen <= self.dim:
            raise ValueError("n_per_gen must exceed dim for a non-singular covariance")
        check_probability(self.rho, "rho")
        if self.mode is CollapseMode.ACCUMULATION and self.rho == 0:
            raise ValueError("accumulation needs rho in (0, 1]")


def collapse_lower_bound(T: float, d_eff: float, n_min: float, c1: float = COLLAPSE_C1) -> float:
    """Expected total-variation lower bound 1 - exp(-c1 T^2 d_eff / n_min)."""
    if T < 0 or d_eff <= 0 or n_min <= 0:
        raise ValueError("need T >= 0, d_eff > 0, n_min > 0")
    return float(-math.expm1(-c1 * T * T * d_eff / n_min))


def sequence_collapse_bound(T: float, mean_entropy: float, seq_len: int, vocab: int,
                            n_min: float, c2: float = COLLAPSE_C1) -> float:
    """Categorical (seq_len = 1) and autoregressive collapse bound.

    Uses the effective dimension mean_entropy * seq_len / ln(vocab).
    """
    if vocab < 2 or seq_len < 1 or mean_entropy < 0:
        raise ValueError("need vocab >= 2, seq_len >= 1, mean_entropy >= 0")
    d_eff = mean_entropy * seq_len / math.log(vocab)
    if d_eff == 0:
        return 0.0
    return collapse_lower_bound(T, d_eff, n_min, c2)


def accumulation_ceiling(d_eff: float, rho: float, n0: float, c3: float = 1.0) -> float:
    """T-independent divergence ceiling c3 d_eff pi^2 / (6 rho n0)."""
    rho = check_probability(rho, "rho")
    if rho == 0:
        raise ValueError("rho must be positive")
    if c3 < 0 or d_eff <= 0 or n0 <= 0:
        raise ValueError("need c3 >= 0, d_eff > 0, n0 > 0")
    return c3 * d_eff * math.pi**2 / (6 * rho * n0)


def gaussian_kl_full(mu0, cov0, mu1, cov1) -> float:
    """KL(N(mu0, cov0) || N(mu1, cov1)) in nats."""
    d = mu0.size
    L1 = np.linalg.cholesky(cov1)
    L0 = np.linalg.cholesky(cov0)
    solve = np.linalg.solve(L1, L0)
    trace = float(np.sum(solve**2))
    diff = np.linalg.solve(L1, mu1 - mu0)
    maha = float(diff @ diff)
    logdet = 2.0 * (np.sum(np.log(np.diag(L1))) - np.sum(np.log(np.diag(L0))))
    return 0.5 * (trace + maha - d + float(logdet))


def _fit(x: np.ndarray):
    mu = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])
    cov = cov + RIDGE * np.eye(x.shape[1])
    return mu, cov


def collapse_trajectory(cfg: CollapseConfig, rng: np.random.Generator) -> np.ndarray:
    """KL(p0 || p_t) for t = 0..T for a single seeded run; p0 = N(0, I)."""
    d, n = cfg.dim, cfg.n_per_gen
    mu0, cov0 = np.zeros(d), np.eye(d)
    mu, cov = mu0.copy(), cov0.copy()
    n_real = int(round(cfg.rho * n)) if cfg.mode is CollapseMode.ACCUMULATION else 0
    out = np.zeros(cfg.generations + 1)
    for t in range(1, cfg.generations + 1):
        L = np.linalg.cholesky(cov)
        synth = mu + rng.standard_normal((n - n_real, d)) @ L.T
        if n_real:
            synth = np.vstack([rng.standard_normal((n_real, d)), synth])
        mu, cov = _fit(synth)
        out[t] = gaussian_kl_full(mu0, cov0, mu, cov)
    return out


def simulate_collapse(cfg: CollapseConfig, seed: int, runs: int = 1,
                      workers: int = 1) -> np.ndarray:
    """KL-to-p0 trajectories, one row per run, run i seeded from (seed, i)."""
    seed = check_seed(seed)
    if runs < 1:
        raise ValueError("runs must be positive")
    rows = parallel_map(lambda i: collapse_trajectory(cfg, trial_rng(seed, i)),
                        list(range(runs)), workers)
    return np.vstack(rows)


def quadratic_fit_r2(T: np.ndarray, kl: np.ndarray) -> tuple[float, float]:
    """Least-squares fit kl = a T^2 through the origin; returns (a, R^2)."""
    T = np.asarray(T, dtype=float)
    kl = np.asarray(kl, dtype=float)
    x = T**2
    a = float(x @ kl / (x @ x))
    resid = kl - a * x
    ss_tot = float(np.sum((kl - kl.mean()) ** 2))
    return a, 1.0 - float(resid @ resid) / ss_tot

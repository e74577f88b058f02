"""PAC-Bayes bound and rank ceiling for low-rank adapters."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import check_probability

# Reference effective parameter counts quoted per base model (rank 16).
LORA_TABLE_REFERENCE = {"7B": 8.4e6, "13B": 13.1e6}
# Reference token-level bounds; they depend on empirical losses not shipped here.
LORA_BOUND_REFERENCE = (0.918, 0.873, 0.822)
# Calibrated so that N = 52000 documents with d + k = 12288 gives a ceiling of 32.
RANK_CEILING_C0 = 52000 / (12288 * math.log(52000) * 32)


@dataclass(frozen=True)
class LoraConfig:
    m: int
    r: int
    d: int
    k: int
    N: int
    sigma_P: float = 1.0
    sigma_Q: float = 1.0
    phi_norm_sq: float = 0.0
    delta: float = 0.05
    loss_range: float = 1.0

    def __post_init__(self) -> None:
        for name in ("m", "r", "d", "k", "N"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("sigma_P", "sigma_Q", "loss_range"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.phi_norm_sq < 0:
            raise ValueError("phi_norm_sq must be non-negative")
        check_probability(self.delta, "delta")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")


def lora_effective_params(cfg: LoraConfig) -> int:
    """Trainable parameter count q = m r (d + k)."""
    return cfg.m * cfg.r * (cfg.d + cfg.k)


def gaussian_kl(q: int, sigma_P: float, sigma_Q: float, phi_norm_sq: float) -> float:
    """KL(N(phi, sigma_Q^2 I_q) || N(0, sigma_P^2 I_q))."""
    ratio = sigma_Q**2 / sigma_P**2
    return 0.5 * (q * ratio + phi_norm_sq / sigma_P**2 - q - q * math.log(ratio))


def lora_kl(cfg: LoraConfig) -> float:
    return gaussian_kl(lora_effective_params(cfg), cfg.sigma_P, cfg.sigma_Q, cfg.phi_norm_sq)


@dataclass(frozen=True)
class LoraBound:
    bound: float
    complexity: float
    mc_correction: float
    kl: float
    vacuous: bool


def lora_bound(cfg: LoraConfig, empirical_loss: float, delta_mc: float, mc_samples: int,
               k_eff: int, normalizer: float = 1.0) -> LoraBound:
    """Empirical loss plus Monte Carlo correction plus the PAC-Bayes complexity term.

    The bound is divided by ``normalizer`` before the vacuity check (bound >= 1).
    """
    if empirical_loss < 0:
        raise ValueError("empirical_loss must be non-negative")
    delta_mc = check_probability(delta_mc, "delta_mc")
    if not 0 < delta_mc < 1:
        raise ValueError("delta_mc must lie in (0, 1)")
    if mc_samples < 1 or k_eff < 1:
        raise ValueError("mc_samples and k_eff must be positive")
    if normalizer <= 0:
        raise ValueError("normalizer must be positive")
    kl = lora_kl(cfg)
    N = cfg.N
    complexity = math.sqrt((kl + math.log(2 * math.sqrt(N) / cfg.delta)) / (2 * N))
    mc = cfg.loss_range**2 * cfg.sigma_Q**2 * math.sqrt(
        2 * k_eff * math.log(2 * k_eff / delta_mc) / mc_samples)
    total = (empirical_loss + mc + complexity) / normalizer
    return LoraBound(total, complexity, mc, kl, total >= 1.0)


def rank_ceiling(d: int, k: int, N: int, c0: float = RANK_CEILING_C0) -> float:
    """Largest rank keeping the bound non-vacuous: N / (c0 (d + k) ln N)."""
    if N < 3:
        raise ValueError("N must be >= 3")
    if d < 1 or k < 1 or c0 <= 0:
        raise ValueError("d, k and c0 must be positive")
    return N / (c0 * (d + k) * math.log(N))

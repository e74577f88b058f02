"""Knowledge-edit interference and capacity, and the population coverage bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import check_probability


@dataclass(frozen=True)
class EditConfig:
    d: int
    alpha: float
    c: float = 1.10
    eta_mag: float = 0.87
    tau: float = 0.1
    rank: int = 1
    layers: int = 1

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be positive")
        if not self.alpha > 1:
            raise ValueError("superposition ratio alpha must exceed 1")
        for name in ("c", "eta_mag", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.rank < 1 or self.layers < 1:
            raise ValueError("rank and layers must be positive")


def edit_interference(cfg: EditConfig, value_shift_norm: float) -> float:
    """Per-edit interference (c / sqrt d) * ||v' - v|| * (1 - 1/alpha)."""
    if value_shift_norm < 0:
        raise ValueError("value_shift_norm must be non-negative")
    return cfg.c / math.sqrt(cfg.d) * value_shift_norm * (1.0 - 1.0 / cfg.alpha)


@dataclass(frozen=True)
class EditCapacity:
    k_star: float
    k_star_rank_r: float
    k_star_multilayer: float


def edit_capacity(cfg: EditConfig) -> EditCapacity:
    """Edits tolerated before accumulated interference reaches tau.

    The rank-r figure is the leading r K* term; the O(r^2/d) correction
    has no stated constant and is omitted.
    """
    k = cfg.tau * math.sqrt(cfg.d) / (cfg.c * cfg.eta_mag * (1.0 - 1.0 / cfg.alpha))
    return EditCapacity(k, cfg.rank * k, cfg.layers * k)


EVOPREF_DELTA = 0.05
EVOPREF_GENERATIONS = 200
EVOPREF_LAMBDA = 0.1
EVOPREF_OBSERVED_GAP = 0.133


def _term1(gamma, n, delta, c1):
    return c1 * math.sqrt(gamma * math.log(1.0 / delta) / n)


def calibrated_c2(gamma: float = 0.10, n: int = 52000, mu: int = 32,
                  observed: float = EVOPREF_OBSERVED_GAP, delta: float = EVOPREF_DELTA,
                  c1: float = 1.0, c3: float = 1.0, lambda_conv: float = EVOPREF_LAMBDA,
                  G: int = EVOPREF_GENERATIONS) -> float:
    """Population-term constant that makes the bound hit the observed gap."""
    rest = _term1(gamma, n, delta, c1) + c3 * math.exp(-lambda_conv * G)
    return (observed - rest) * math.sqrt(mu)


EVOPREF_C2 = calibrated_c2()


@dataclass(frozen=True)
class CoverageGap:
    sample_term: float
    population_term: float
    convergence_term: float

    @property
    def total(self) -> float:
        return self.sample_term + self.population_term + self.convergence_term


def evopref_gap(gamma: float, n: int, mu: int, G: int = EVOPREF_GENERATIONS,
                delta: float = EVOPREF_DELTA, c1: float = 1.0, c2: float = EVOPREF_C2,
                c3: float = 1.0, lambda_conv: float = EVOPREF_LAMBDA) -> CoverageGap:
    """Three-term coverage gap c1 sqrt(gamma ln(1/delta)/n) + c2/sqrt(mu) + c3 exp(-lambda G)."""
    gamma = check_probability(gamma, "gamma")
    delta = check_probability(delta, "delta")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if n < 1 or mu < 1 or G < 0:
        raise ValueError("n and mu must be positive, G non-negative")
    if min(c1, c2, c3) < 0 or lambda_conv <= 0:
        raise ValueError("constants must be non-negative and lambda positive")
    return CoverageGap(_term1(gamma, n, delta, c1), c2 / math.sqrt(mu),
                       c3 * math.exp(-lambda_conv * G))

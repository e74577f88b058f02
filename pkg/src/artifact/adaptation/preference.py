"""Preference learning regimes and the misspecified-comparison simulator."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import expit

from ..core import SimReport, check_probability, check_seed, parallel_map, trial_rng

MAX_ITEMS = 50
CHECKPOINT_GROWTH = 1.05
HORIZON_FACTOR = 400.0


@dataclass(frozen=True)
class PrefProblem:
    n_items: int
    gap: float
    gamma: float = 0.0
    target_error: float = 1.0 / 3.0

    def __post_init__(self) -> None:
        if self.n_items < 2:
            raise ValueError("n_items must be >= 2")
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        check_probability(self.gamma, "gamma")
        if self.gamma >= 0.5:
            raise ValueError("gamma must be < 0.5")
        check_probability(self.target_error, "target_error")


class PrefRegime(str, enum.Enum):
    WELL_SPECIFIED = "WellSpecified"
    MISSPECIFIED = "Misspecified"


@dataclass(frozen=True)
class RegimeResult:
    regime: PrefRegime
    gamma_star: float
    budget: float


def pref_regime(p: PrefProblem, c: float = 1.0) -> RegimeResult:
    """Classify against gamma* = gap/n and return the matching sample budget."""
    n = p.n_items
    gamma_star = p.gap / n
    if p.gamma > gamma_star:
        return RegimeResult(PrefRegime.MISSPECIFIED, gamma_star, c * n * n * math.log(n) / p.gamma**2)
    return RegimeResult(PrefRegime.WELL_SPECIFIED, gamma_star, c * n * math.log(n) / p.gap**2)


class DpoAdvice(str, enum.Enum):
    EQUIVALENT = "Equivalent"
    PREFER_RLHF = "PreferRLHF"
    COMPARABLE_DEGRADATION = "ComparableDegradation"


def dpo_rlhf_advice(gamma: float, n: int, reward_width: int, c1: float = 0.1) -> DpoAdvice:
    """Equivalent at gamma = 0; RLHF preferred once reward width reaches c1 n / gamma."""
    gamma = check_probability(gamma, "gamma")
    if n < 1 or reward_width < 1 or c1 <= 0:
        raise ValueError("n, reward_width and c1 must be positive")
    if gamma == 0:
        return DpoAdvice.EQUIVALENT
    if reward_width >= c1 * n / gamma:
        return DpoAdvice.PREFER_RLHF
    return DpoAdvice.COMPARABLE_DEGRADATION


class Noise(str, enum.Enum):
    NONE = "none"
    BENIGN = "benign"
    ADVERSARIAL = "adversarial"


def comparison_matrix(p: PrefProblem, noise: Noise) -> tuple[np.ndarray, int, int, bool]:
    """Pr[i beats j] for rewards r_i = i * gap, plus the target pair (a, b).

    The target is the middle adjacent pair, b = a + 1. Benign noise uses
    q_ij = 1/2. Adversarial noise picks q_ij to set every pair other than
    the target pair to exactly 1/2, clipped to [0, 1]; the flag reports
    whether clipping was needed.
    """
    n = p.n_items
    r = np.arange(n) * p.gap
    base = expit(r[:, None] - r[None, :])
    a = (n - 1) // 2
    b = a + 1
    g = p.gamma if noise is not Noise.NONE else 0.0
    if noise is Noise.ADVERSARIAL and g > 0:
        q = np.clip((0.5 - (1 - g) * base) / g, 0.0, 1.0)
        clipped = bool(np.any(np.abs((0.5 - (1 - g) * base) / g - q) > 1e-15))
        q[a, b] = q[b, a] = 0.5
    else:
        q = np.full_like(base, 0.5)
        clipped = False
    P = (1 - g) * base + g * q
    np.fill_diagonal(P, 0.5)
    return P, a, b, clipped


def borda_walk(P: np.ndarray, a: int, b: int) -> tuple[float, float]:
    """Per-comparison probabilities that W_b - W_a moves up or down.

    Pairs are drawn uniformly from the n(n-1)/2 unordered pairs.
    """
    n = P.shape[0]
    pairs = n * (n - 1) / 2
    up = down = 0.0
    for c in range(n):
        if c in (a, b):
            continue
        up += P[b, c]
        down += P[a, c]
    up += P[b, a]
    down += P[a, b]
    return up / pairs, down / pairs


def walk_scale(up: float, down: float) -> float:
    """Variance-to-squared-drift ratio of the Borda difference walk."""
    mu = up - down
    if mu <= 0:
        raise ValueError("target pair carries no signal under this noise model")
    var = up + down - mu * mu
    return var / (mu * mu)


def _checkpoints(horizon: float) -> np.ndarray:
    pts = [1]
    while pts[-1] < horizon:
        pts.append(max(pts[-1] + 1, int(math.ceil(pts[-1] * CHECKPOINT_GROWTH))))
    return np.array(pts, dtype=np.int64)


def _stabilisation(up, down, checkpoints, size, rng) -> np.ndarray:
    """First checkpoint after which the Borda order of the pair stays correct."""
    steps = np.diff(np.concatenate([[0], checkpoints]))
    D = np.zeros(size, dtype=np.int64)
    last_bad = np.full(size, -1)
    for i, m in enumerate(steps):
        counts = rng.multinomial(m, [up, down, 1.0 - up - down], size=size)
        D += counts[:, 0] - counts[:, 1]
        last_bad[D <= 0] = i
    idx = np.minimum(last_bad + 1, len(checkpoints) - 1)
    return checkpoints[idx]


@dataclass(frozen=True)
class PreferenceResult:
    report: SimReport
    quantile: float
    iqr: float
    walk_scale: float
    clipped: bool
    censored: int


def _median_interval(sorted_vals: np.ndarray, confidence: float = 0.95) -> tuple[float, float]:
    n = sorted_vals.size
    lo = int(stats.binom.ppf((1 - confidence) / 2, n, 0.5))
    hi = int(stats.binom.isf((1 - confidence) / 2, n, 0.5))
    lo = max(0, min(n - 1, lo - 1))
    hi = max(0, min(n - 1, hi))
    return float(sorted_vals[lo]), float(sorted_vals[hi])


def simulate_preference(p: PrefProblem, noise: Noise | str, trials: int, seed: int,
                        workers: int = 1) -> PreferenceResult:
    """Comparisons needed before Borda orders the target adjacent pair correctly.

    Each trial tracks W_b - W_a at geometrically spaced comparison counts,
    drawing the increments between checkpoints exactly from a multinomial.
    The per-trial statistic is the first checkpoint after which the pair is
    ordered correctly at every later checkpoint. The report's estimate is the
    median over trials; ``quantile`` is the count at which a 1 - target_error
    share of trials have stabilised.
    """
    noise = Noise(noise)
    if p.n_items > MAX_ITEMS:
        raise ValueError(f"n_items must be <= {MAX_ITEMS}")
    if trials < 1:
        raise ValueError("trials must be positive")
    seed = check_seed(seed)
    P, a, b, clipped = comparison_matrix(p, noise)
    up, down = borda_walk(P, a, b)
    scale = walk_scale(up, down)
    cps = _checkpoints(HORIZON_FACTOR * scale)

    def run(i):
        return _stabilisation(up, down, cps, 1, trial_rng(seed, i))[0]

    vals = np.sort(np.array(parallel_map(run, list(range(trials)), workers), dtype=float))
    med = float(np.median(vals))
    lo, hi = _median_interval(vals)
    lo, hi = min(lo, med), max(hi, med)
    q = float(np.quantile(vals, 1.0 - p.target_error))
    iqr = float(np.quantile(vals, 0.75) - np.quantile(vals, 0.25))
    censored = int(np.sum(vals >= cps[-1]))
    return PreferenceResult(SimReport(med, lo, hi, trials, seed), q, iqr, scale, clipped, censored)

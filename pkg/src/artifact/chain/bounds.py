"""Chain-of-thought reliability bounds and the i.i.d. step simulator."""

from __future__ import annotations

import math

import numpy as np

from ..core import (
    SimReport,
    binom_tail,
    check_probability,
    check_seed,
    parallel_map,
    trial_blocks,
    trial_rng,
)


def _check_eps(eps: float) -> float:
    eps = check_probability(eps, "eps")
    if eps >= 0.5:
        raise ValueError(f"per-step error must be < 0.5, got {eps}")
    return eps


def chain_error_bound(n: int, eps: float) -> float:
    """Probability that at least one of ``n`` independent steps fails: 1-(1-eps)^n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    eps = _check_eps(eps)
    return float(-math.expm1(n * math.log1p(-eps)))


def _largest_n(pred, guess: int) -> int:
    """Largest n >= 0 with pred(n) true, starting near ``guess``.

    Assumes pred is monotone (true then false). Corrects floating-point
    off-by-one errors of closed-form floors.
    """
    n = max(0, guess)
    while n > 0 and not pred(n):
        n -= 1
    while pred(n + 1):
        n += 1
    return n


# Relative slack so bounds equal to delta in exact arithmetic are not lost to rounding.
BOUND_RTOL = 1e-12


def _within(bound: float, delta: float) -> bool:
    return bound <= delta * (1.0 + BOUND_RTOL)


def safe_length(eps: float, delta: float) -> int:
    """Largest chain length whose error bound stays within ``delta``."""
    eps = _check_eps(eps)
    delta = check_probability(delta, "delta")
    if eps == 0.0 or delta == 0.0 or delta == 1.0:
        raise ValueError("safe_length needs 0 < eps and 0 < delta < 1")
    guess = math.floor(math.log1p(-delta) / math.log1p(-eps))
    return _largest_n(lambda n: _within(chain_error_bound(n, eps), delta), guess)


def fano_lower_bound(n: int, eps: float, answer_space: int) -> float:
    """Fano-type lower bound on chain error, clamped at 0."""
    if answer_space < 2:
        raise ValueError("answer_space must be >= 2")
    if n < 1:
        raise ValueError("n must be positive")
    eps = _check_eps(eps)
    val = -math.expm1(n * math.log1p(-eps / 2)) - 1.0 / (n * math.log(answer_space))
    return max(0.0, val)


def majority_threshold(k: int) -> int:
    """Number of wrong candidates (out of k+1) that makes a step fail."""
    return math.ceil((k + 1) / 2)


def kredundant_bound(n: int, eps: float, k: int) -> float:
    """Union bound on chain error with (k+1)-candidate majority voting, clamped to 1."""
    if k < 2:
        raise ValueError("k must be >= 2")
    eps = _check_eps(eps)
    m = majority_threshold(k)
    return min(1.0, math.comb(k + 1, m) * n * eps**m)


def majority_step_error(eps: float, k: int) -> float:
    """Exact per-step failure probability under (k+1)-candidate voting.

    Ties count as failures, matching the union bound's threshold.
    """
    eps = _check_eps(eps)
    return binom_tail(k + 1, majority_threshold(k), eps)


def exact_majority_chain_error(n: int, eps: float, k: int) -> float:
    p = majority_step_error(eps, k)
    return float(-math.expm1(n * math.log1p(-p)))


def kredundant_safe_length(eps: float, delta: float, k: int) -> int:
    """Largest n whose k-redundant union bound stays within ``delta``."""
    if k < 2:
        raise ValueError("k must be >= 2")
    eps = _check_eps(eps)
    delta = check_probability(delta, "delta")
    if eps == 0.0:
        raise ValueError("eps = 0 gives an unbounded safe length")
    if delta == 0.0:
        return 0
    m = majority_threshold(k)
    per_step = math.comb(k + 1, m) * eps**m
    guess = math.floor(delta / per_step)
    return _largest_n(lambda n: _within(kredundant_bound(n, eps, k), delta), guess)


def optimal_k(n: float, delta: float, eps: float) -> int:
    """Cost-optimal verification level ceil(2 ln(n/delta)/ln(1/eps) - 1), at least 1."""
    eps = _check_eps(eps)
    if eps == 0.0:
        raise ValueError("eps must be positive")
    if n <= 0 or delta <= 0:
        raise ValueError("n and delta must be positive")
    raw = 2.0 * math.log(n / delta) / math.log(1.0 / eps) - 1.0
    return max(1, math.ceil(raw - 1e-12))


def _chain_block(n: int, eps: float, k: int, size: int, rng: np.random.Generator) -> int:
    if k == 0:
        wrong = rng.random((size, n)) < eps
        return int(wrong.any(axis=1).sum())
    wrong_votes = rng.binomial(k + 1, eps, size=(size, n))
    failed = wrong_votes >= majority_threshold(k)
    return int(failed.any(axis=1).sum())


def simulate_chain(n: int, eps: float, k: int, trials: int, seed: int,
                   workers: int = 1) -> SimReport:
    """Monte Carlo chain error under i.i.d. Bernoulli steps.

    ``k = 0`` runs a single candidate per step; ``k >= 2`` runs a
    (k+1)-candidate majority vote at every step.
    """
    if n < 1:
        raise ValueError("n must be positive")
    eps = _check_eps(eps)
    if k == 1 or k < 0:
        raise ValueError("k must be 0 or >= 2")
    if trials < 100:
        raise ValueError("trials must be >= 100")
    seed = check_seed(seed)

    def run(block):
        idx, size = block
        return _chain_block(n, eps, k, size, trial_rng(seed, idx))

    failures = sum(parallel_map(run, trial_blocks(trials), workers))
    return SimReport.from_counts(failures, trials, seed)


def entropy_threshold(lam: float, gamma: float) -> float:
    """Stopping threshold h* = (lam/gamma) ln(1/lam), in nats."""
    lam = check_probability(lam, "lambda")
    gamma = check_probability(gamma, "gamma")
    if lam in (0.0, 1.0):
        raise ValueError("lambda must lie strictly inside (0, 1)")
    if gamma == 0.0:
        raise ValueError("gamma must be positive")
    return lam / gamma * math.log(1.0 / lam)

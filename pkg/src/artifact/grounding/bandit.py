"""Step-level retrieval as a linear contextual bandit (LinUCB)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import check_probability, check_seed, parallel_map, trial_rng

DEFAULT_THETA = (0.6, 0.3, -0.5, -0.2)
DEFAULT_REGRET_C = 2.0


@dataclass(frozen=True)
class BanditEnv:
    """Retrieval environment: features (u1, u2, u3, 1), reward theta . phi + noise.

    Retrieving at a step earns the reward; skipping earns 0.
    """

    theta: tuple = DEFAULT_THETA
    noise_sigma: float = 0.1
    horizon: int = 1000

    def __post_init__(self) -> None:
        th = np.asarray(self.theta, dtype=float)
        if th.shape != (4,):
            raise ValueError("theta must have length 4")
        if np.linalg.norm(th) > 1 + 1e-12:
            raise ValueError("theta must have norm <= 1")
        if not 0 <= self.noise_sigma <= 0.5:
            raise ValueError("noise sigma must lie in [0, 0.5]")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    def features(self, rng: np.random.Generator) -> np.ndarray:
        phi = np.ones((self.horizon, 4))
        phi[:, :3] = rng.random((self.horizon, 3))
        return phi


@dataclass
class BanditRun:
    cumulative_regret: np.ndarray
    retrieve_fraction: float
    trace: list = field(default_factory=list)

    @property
    def final_regret(self) -> float:
        return float(self.cumulative_regret[-1])


def run_bandit_retrieval(env: BanditEnv, delta: float, seed: int, ridge: float = 1.0,
                         threshold: float = 0.0, keep_trace: bool = False) -> BanditRun:
    """LinUCB with A = ridge I and exploration alpha = sqrt(ln(T/delta)/2).

    Retrieve when the upper confidence bound reaches ``threshold``; the
    model is updated only on retrieved steps, where the reward is observed.
    Regret is measured against the policy that retrieves iff theta . phi > 0.
    """
    delta = check_probability(delta, "delta")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    seed = check_seed(seed)
    rng = trial_rng(seed, 0)
    T = env.horizon
    theta = np.asarray(env.theta, dtype=float)
    phis = env.features(rng)
    noise = rng.standard_normal(T) * env.noise_sigma
    alpha = math.sqrt(math.log(T / delta) / 2)
    A_inv = np.eye(4) / ridge
    b = np.zeros(4)
    regret = np.zeros(T)
    total = 0.0
    retrieved = 0
    trace = []
    for t in range(T):
        phi = phis[t]
        est = A_inv @ b
        ucb = float(est @ phi + alpha * math.sqrt(phi @ A_inv @ phi))
        act = ucb >= threshold
        mean = float(theta @ phi)
        reward = mean + noise[t] if act else 0.0
        if act:
            retrieved += 1
            Av = A_inv @ phi
            A_inv -= np.outer(Av, Av) / (1.0 + phi @ Av)
            b += reward * phi
        if act != (mean > 0):
            total += abs(mean)
        regret[t] = total
        if keep_trace:
            trace.append((t, int(act), reward, total))
    return BanditRun(regret, retrieved / T, trace)


def run_bandit_seeds(env: BanditEnv, delta: float, seeds, workers: int = 1) -> np.ndarray:
    """Final regrets for each seed, order preserved."""
    return np.array(parallel_map(lambda s: run_bandit_retrieval(env, delta, s).final_regret,
                                 list(seeds), workers))


def regret_bound(T: int, d: int, delta: float, C: float = DEFAULT_REGRET_C) -> float:
    """Regret envelope C d sqrt(T ln(T/delta))."""
    if T < 0 or d < 1 or C <= 0:
        raise ValueError("need T >= 0, d >= 1, C > 0")
    delta = check_probability(delta, "delta")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if T == 0:
        return 0.0
    return C * d * math.sqrt(T * math.log(T / delta))

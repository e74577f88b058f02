"""Welfare loss with and without mechanism design and verification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..core import SimReport, check_probability, check_seed, parallel_map, trial_blocks, trial_rng
from .incentives import AgentModel
from .mechanism import MechanismTree, Marketplace, walk_tree


class Scenario(str, enum.Enum):
    NO_VERIFICATION = "NoVerification"
    NO_MECHANISM = "NoMechanism"
    BOTH = "Both"


class ExpBase(str, enum.Enum):
    NATURAL = "Natural"
    TWO = "Two"


def soundness_error(kappa: float, exp_base: ExpBase = ExpBase.TWO) -> float:
    """Verifier miss probability base^-kappa; exact for base 2 via ldexp."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if ExpBase(exp_base) is ExpBase.TWO:
        return math.ldexp(1.0, -int(kappa)) if float(kappa).is_integer() else 2.0 ** -kappa
    return math.exp(-kappa)


def welfare_loss(scenario: Scenario, market: Marketplace, eps: float, kappa: float,
                 exp_base: ExpBase = ExpBase.TWO) -> float:
    """Worst-case welfare loss for the three deployment scenarios."""
    eps = check_probability(eps, "eps")
    scenario = Scenario(scenario)
    if scenario is Scenario.NO_VERIFICATION:
        return float(np.dot(market.values, market.gaps))
    if scenario is Scenario.NO_MECHANISM:
        return market.n_agents * eps * market.v_max
    miss = soundness_error(kappa, exp_base)
    return (market.n_agents * eps + market.m_tasks * miss) * market.v_max


def selective_alpha(Delta: float, kappa: float, cost_ver: float,
                    exp_base: ExpBase = ExpBase.TWO) -> float:
    """Verification rate (Delta - s) / (Delta + cost_ver (Delta - s)), s = base^-kappa."""
    Delta = check_probability(Delta, "Delta")
    if not cost_ver >= 0:
        raise ValueError("cost_ver must be non-negative")
    s = soundness_error(kappa, exp_base)
    if not Delta > s:
        raise ValueError("Delta must exceed the soundness error")
    return (Delta - s) / (Delta + cost_ver * (Delta - s))


# Verification cost that makes the optimal rate 0.3 at Delta = 0.1 and kappa = 128.
CALIBRATED_COST_VER = 1.0 / 0.3 - 1.0


def selective_loss_closed_form(eps: float, alpha: float, Delta: float, kappa: float,
                               exp_base: ExpBase = ExpBase.TWO) -> float:
    """Loss fraction eps + (1 - alpha) Delta + alpha base^-kappa."""
    return eps + (1 - alpha) * Delta + alpha * soundness_error(kappa, exp_base)


@dataclass(frozen=True)
class SelectiveResult:
    welfare: SimReport
    loss: SimReport
    verified_fraction: float
    optimal_welfare: float


def run_selective(market: Marketplace, tree: MechanismTree, alpha: float, kappa: float,
                  trials: int, seed: int, agents=AgentModel(), substitutes=None,
                  exp_base: ExpBase = ExpBase.TWO, workers: int = 1) -> SelectiveResult:
    """Monte Carlo welfare under mechanism play plus sampled verification.

    Each trial plays the tree with the given agents, then every allocated
    task is verified with probability max(alpha, alpha V_j / V_max) (the
    value-stratified floor). A substituting agent degrades its competence
    on task j by Delta_j unless verified and caught; catching fails with
    probability base^-kappa, and a caught agent is made to re-execute.
    """
    alpha = check_probability(alpha, "alpha")
    seed = check_seed(seed)
    miss = soundness_error(kappa, exp_base)
    subs = [True] * market.n_agents if substitutes is None else list(substitutes)
    if len(subs) != market.n_agents:
        raise ValueError("substitutes needs one flag per agent")
    agent_list = [agents] * market.n_agents if isinstance(agents, AgentModel) else list(agents)
    V = np.asarray(market.values)
    q = np.asarray(market.competence)
    gaps = np.asarray(market.gaps)
    rates = np.maximum(alpha, alpha * V / market.v_max)
    w_star = market.optimal_welfare()

    def trial(rng):
        welfare, verified, tasks = 0.0, 0, 0
        leaf, _, _ = walk_tree(tree, agent_list, rng)
        for j, i in sorted(leaf.allocation.items()):
            tasks += 1
            qij = q[i, j]
            if subs[i]:
                checked = rng.random() < rates[j]
                verified += checked
                caught = checked and rng.random() >= miss
                if not caught:
                    qij = max(0.0, qij - gaps[j])
            welfare += V[j] * qij
        return welfare, verified, tasks

    def block(arg):
        idx, size = arg
        rng = trial_rng(seed, idx)
        return np.array([trial(rng) for _ in range(size)])

    res = np.vstack(parallel_map(block, trial_blocks(trials), workers))
    welfare = SimReport.from_samples(res[:, 0], seed)
    loss = SimReport.from_samples((w_star - res[:, 0]) / market.v_max, seed)
    tasks = res[:, 2].sum()
    frac = float(res[:, 1].sum() / tasks) if tasks else 0.0
    return SelectiveResult(welfare, loss, frac, w_star)


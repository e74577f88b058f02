"""Incentive arithmetic for LLM agents: OSP violation, VCG failure, coalitions, detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..core import check_probability

OSP_SIGMA_RATIO_LIMIT = 0.05

# Per-model violation components (within-horizon, prompt reversal) and totals.
OSP_TABLE = {
    "GPT-4": (0.138, 0.019, 0.157),
    "Claude-3 Opus": (0.112, 0.015, 0.127),
    "Llama-3-70B": (0.176, 0.031, 0.207),
    "Mixtral-8x22B": (0.193, 0.027, 0.220),
}


@dataclass(frozen=True)
class AgentModel:
    eps1: float = 0.0
    sigma_pi: float = 0.0
    lookahead: int = 2

    def __post_init__(self) -> None:
        check_probability(self.eps1, "eps1")
        if self.eps1 >= 0.5:
            raise ValueError("eps1 must be < 0.5")
        if self.sigma_pi < 0:
            raise ValueError("sigma_pi must be non-negative")
        if self.lookahead < 1:
            raise ValueError("lookahead must be positive")


@dataclass(frozen=True)
class OspEpsilon:
    eps2: float
    eps_total: float


def osp_epsilon(agent: AgentModel, T_infosets: int, delta_min: float) -> OspEpsilon:
    """Violation bound eps1 + eps2 with the Chebyshev term eps2 = T sigma^2 / delta_min^2."""
    if not delta_min > 0:
        raise ValueError("delta_min must be positive")
    if T_infosets < 1:
        raise ValueError("T_infosets must be positive")
    eps2 = min(1.0, T_infosets * agent.sigma_pi**2 / delta_min**2)
    return OspEpsilon(eps2, min(1.0, agent.eps1 + eps2))


class NoReversal(ValueError):
    pass


@dataclass(frozen=True)
class VcgInstance:
    outcomes: tuple
    reported: dict  # agent-1 valuation it reports under its initial prompt
    realised: dict  # agent-1 valuation under the prompt in force at execution
    others: dict  # agent-2 valuation
    allocation_truthful: str
    allocation_deviation: str
    payment_truthful: float
    payment_deviation: float
    utility_truthful: float
    utility_deviation: float

    @property
    def deviation_profit(self) -> float:
        return self.utility_deviation - self.utility_truthful


def _vcg(profile: list[dict], outcomes) -> tuple[str, list[float]]:
    """Welfare-maximising outcome and Clarke pivot payments.

    Ties resolve to the earlier outcome in ``outcomes``.
    """
    def best(agents):
        return max(outcomes, key=lambda o: (sum(v[o] for v in agents), -outcomes.index(o)))

    chosen = best(profile)
    pays = []
    for i in range(len(profile)):
        others = profile[:i] + profile[i + 1:]
        without = best(others)
        pays.append(sum(v[without] for v in others) - sum(v[chosen] for v in others))
    return chosen, pays


def _find_reversal(v_pi: dict, v_pi_prime: dict):
    keys = list(v_pi)
    for a in keys:
        for b in keys:
            if a != b and v_pi[a] > v_pi[b] and v_pi_prime[b] > v_pi_prime[a]:
                return a, b
    return None


def vcg_counterexample(valuation_pi: dict, valuation_pi_prime: dict, beta: float) -> VcgInstance:
    """Two-agent instance where reporting the prompt-pi valuation loses beta against a misreport.

    Agent 1 reports under prompt pi but its valuation at execution is the
    prompt-pi' one, which reverses the order of outcomes a and a'. Agent 2
    values a at alpha = D' - beta above a', where D' is agent 1's realised
    preference for a'. Both profiles are executed through Clarke-pivot VCG
    and the utility difference is measured, not asserted.
    """
    if set(valuation_pi) != set(valuation_pi_prime):
        raise ValueError("valuations must cover the same outcomes")
    if not beta > 0:
        raise ValueError("beta must be positive")
    pair = _find_reversal(valuation_pi, valuation_pi_prime)
    if pair is None:
        raise NoReversal("valuations agree in order on every outcome pair")
    a, a2 = pair
    D = valuation_pi[a] - valuation_pi[a2]
    D_prime = valuation_pi_prime[a2] - valuation_pi_prime[a]
    if not beta < D + D_prime:
        raise ValueError(f"beta must be below D + D' = {D + D_prime}")
    alpha = D_prime - beta
    outcomes = (a, a2)
    others = {a: max(alpha, 0.0), a2: max(-alpha, 0.0)}
    report = {o: float(valuation_pi[o]) for o in outcomes}
    real = {o: float(valuation_pi_prime[o]) for o in outcomes}

    alloc_t, pay_t = _vcg([report, others], outcomes)
    alloc_d, pay_d = _vcg([real, others], outcomes)
    u_t = real[alloc_t] - pay_t[0]
    u_d = real[alloc_d] - pay_d[0]
    return VcgInstance(outcomes, report, real, others, alloc_t, alloc_d,
                       pay_t[0], pay_d[0], u_t, u_d)


@dataclass(frozen=True)
class ClampedBound:
    value: float
    vacuous: bool


def coalition_stability_bound(n_agents: int, eps: float, eta: float) -> ClampedBound:
    """Stability probability lower bound 1 - n eps - eta, clamped to [0, 1]."""
    if n_agents < 1:
        raise ValueError("n_agents must be positive")
    eps = check_probability(eps, "eps")
    eta = check_probability(eta, "eta")
    raw = 1.0 - n_agents * eps - eta
    return ClampedBound(max(0.0, min(1.0, raw)), raw <= 0.0)


@dataclass(frozen=True)
class DetectionBudget:
    samples: float
    tractable: bool
    np_hard_advisory: bool


def smd_sample_complexity(smd: float, gamma: float, lambda_margin: float, eps: float,
                          n_agents: int, delta: float, c: float = 1.0,
                          coalition_size: int = 2) -> DetectionBudget:
    """Detection samples c SMD / (gamma^2 lambda^2 eps^2) ln(n_agents/delta).

    Tractable when SMD <= 2 ln n_agents; coalitions of three or more carry
    an NP-hardness advisory for exact detection.
    """
    for name, v in (("gamma", gamma), ("lambda_margin", lambda_margin), ("eps", eps),
                    ("delta", delta)):
        check_probability(v, name)
        if v == 0:
            raise ValueError(f"{name} must be positive")
    if not smd > 0 or not c > 0 or n_agents < 1:
        raise ValueError("smd, c and n_agents must be positive")
    samples = c * smd / (gamma**2 * lambda_margin**2 * eps**2) * math.log(n_agents / delta)
    tractable = n_agents >= 2 and smd <= 2 * math.log(n_agents) + 1e-12
    return DetectionBudget(samples, tractable, coalition_size >= 3)

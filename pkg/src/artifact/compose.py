"""Joint reliability of grounded multi-hop reasoning and where to invest."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .core import check_probability

# Reference retention factor for a 7B decoder.
ETA_REFERENCE = 0.7


@dataclass(frozen=True)
class CompositionParams:
    n: float
    eps: float
    q: float
    eta: float

    def __post_init__(self) -> None:
        if not self.n > 0:
            raise ValueError("n must be positive")
        check_probability(self.eps, "eps")
        if self.eps >= 0.5:
            raise ValueError("eps must be < 0.5")
        check_probability(self.q, "q")
        if self.q == 0:
            raise ValueError("q must be positive")
        check_probability(self.eta, "eta")


def retention_factor(c_hop: float, h_cond: float) -> float:
    """Per-hop retention min(1, C_hop / H(R_t | R_{t-1}))."""
    if not h_cond > 0:
        raise ValueError("h_cond must be positive")
    if c_hop < 0:
        raise ValueError("c_hop must be non-negative")
    return min(1.0, c_hop / h_cond)


def joint_reliability(p: CompositionParams) -> float:
    """Reliability (1 - eps)^n q^(n (1 - eta)), evaluated in log space."""
    return math.exp(p.n * math.log1p(-p.eps) + p.n * (1 - p.eta) * math.log(p.q))


def reliability_grad_q(p: CompositionParams) -> float:
    """Partial derivative of joint reliability in q."""
    e = p.n * (1 - p.eta)
    if e == 0:
        return 0.0
    return e * (1 - p.eps) ** p.n * p.q ** (e - 1)


def reliability_grad_eps(p: CompositionParams) -> float:
    """Partial derivative of joint reliability in eps (non-positive)."""
    return -p.n * (1 - p.eps) ** (p.n - 1) * p.q ** (p.n * (1 - p.eta))


@dataclass(frozen=True)
class Attenuation:
    marginal_at_n: float
    marginal_at_shallow: float
    attenuation: float


def marginal_attenuation(p: CompositionParams, n_shallow: float) -> Attenuation:
    """Ratio of the q-marginal at a shallow depth to the one at depth p.n."""
    deep = reliability_grad_q(p)
    shallow = reliability_grad_q(CompositionParams(n_shallow, p.eps, p.q, p.eta))
    ratio = shallow / deep if deep > 0 else math.inf
    return Attenuation(deep, shallow, ratio)


# Deployment box swept for the attenuation range.
ATTENUATION_BOX = {"eps": (0.02, 0.04), "eta": (0.65, 0.75), "q": (0.55, 0.65), "n": (27, 30)}


def attenuation_sweep(n_shallow: float = 5.0, points: int = 5, box=ATTENUATION_BOX) -> np.ndarray:
    """Attenuation factors over a regular grid of the deployment box."""
    axes = [np.linspace(*box[k], points) for k in ("n", "eps", "q", "eta")]
    return np.array([
        marginal_attenuation(CompositionParams(n, e, q, h), n_shallow).attenuation
        for n, e, q, h in itertools.product(*axes)
    ])


class NoRoot(ValueError):
    pass


@dataclass(frozen=True)
class CrossoverModel:
    """Per-unit-budget gains in log-reliability from each investment.

    Reducing eps by a fraction x of itself costs cost_eps x n^eps_exponent;
    closing a fraction x of the retrieval gap 1 - q costs
    cost_q x n^q_exponent. With the defaults reasoning improvements are a
    one-off cost while retrieval improvements are paid at every hop.
    """

    cost_eps: float = 1.0
    cost_q: float = 1.0
    eps_exponent: float = 0.0
    q_exponent: float = 1.0

    def __post_init__(self) -> None:
        if not self.cost_eps > 0 or not self.cost_q > 0:
            raise ValueError("costs must be positive")


def marginal_gains(n: float, eps: float, q: float, eta: float,
                   model: CrossoverModel = CrossoverModel()) -> tuple[float, float]:
    """(reasoning gain, grounding gain) per unit budget at depth n."""
    g_eps = n * eps / (1 - eps) / (model.cost_eps * n**model.eps_exponent)
    g_q = n * (1 - eta) * (1 - q) / q / (model.cost_q * n**model.q_exponent)
    return g_eps, g_q


def crossover_depth(eps: float, eta: float, q: float, cost_eps: float = 1.0,
                    cost_q: float = 1.0, model: CrossoverModel | None = None,
                    lo: float = 1.0, hi: float = 100.0) -> float:
    """Depth in [lo, hi] where reasoning and grounding gains per unit budget equalise."""
    CompositionParams(1.0, eps, q, eta)
    model = model or CrossoverModel(cost_eps, cost_q)
    if eps == 0 or eta == 1 or q == 1:
        raise NoRoot("one investment has zero marginal value at every depth")

    def resid(n):
        a, b = marginal_gains(n, eps, q, eta, model)
        return math.log(a) - math.log(b)

    r_lo, r_hi = resid(lo), resid(hi)
    if r_lo == 0:
        return lo
    if r_lo * r_hi > 0:
        raise NoRoot(f"gains do not cross on [{lo}, {hi}]")
    return float(optimize.brentq(resid, lo, hi, xtol=1e-12, rtol=1e-14))

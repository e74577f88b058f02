"""Evaluation-metric counts, conflict routing and attribution arithmetic."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..core import check_probability


@dataclass(frozen=True)
class MetricRequirements:
    min_metrics: int
    ambiguity_dim: int
    ambiguity_count_order: float


def metric_requirements(k_stages: int, resolution: float = 0.1) -> MetricRequirements:
    """A k-stage pipeline needs k separate metrics; one aggregate leaves a (k-1)-dim ambiguity set."""
    if k_stages < 1:
        raise ValueError("k_stages must be positive")
    resolution = check_probability(resolution, "resolution")
    if resolution == 0:
        raise ValueError("resolution must be positive")
    dim = k_stages - 1
    return MetricRequirements(k_stages, dim, resolution ** (-dim))


class ConflictType(str, enum.Enum):
    TEMPORAL = "Temporal"
    NUMERICAL = "Numerical"
    ENTITY = "Entity"
    SEMANTIC = "Semantic"


class Route(str, enum.Enum):
    SHALLOW = "Shallow"
    DEEP = "Deep"


@dataclass(frozen=True)
class ConflictInstance:
    i_meta: float
    h_claim: float
    true_type: ConflictType | None = None

    def __post_init__(self) -> None:
        if self.i_meta < 0 or not self.h_claim > 0:
            raise ValueError("need i_meta >= 0 and h_claim > 0")
        if self.i_meta > self.h_claim:
            raise ValueError("i_meta cannot exceed h_claim")


def route_conflict(c: ConflictInstance) -> Route:
    """Shallow resolution suffices iff metadata carries at least half the claim entropy."""
    return Route.SHALLOW if c.i_meta >= c.h_claim / 2 else Route.DEEP


# Misrouting costs: accuracy lost when deep conflicts go shallow, compute
# wasted when shallow conflicts go deep.
DEEP_AS_SHALLOW_PP = 9.2
SHALLOW_AS_DEEP_WASTE = 0.94


@dataclass(frozen=True)
class RoutingCost:
    accuracy_penalty_pp: float
    compute_waste_fraction: float


def routing_cost(routed: Route, true_regime: Route) -> RoutingCost:
    routed, true_regime = Route(routed), Route(true_regime)
    if routed is Route.SHALLOW and true_regime is Route.DEEP:
        return RoutingCost(DEEP_AS_SHALLOW_PP, 0.0)
    if routed is Route.DEEP and true_regime is Route.SHALLOW:
        return RoutingCost(0.0, SHALLOW_AS_DEEP_WASTE)
    return RoutingCost(0.0, 0.0)


@dataclass(frozen=True)
class CasResult:
    cas: float
    edge_retained: bool


def cas_score(p_with: float, p_without: float, tau: float = 0.15) -> CasResult:
    """Counterfactual attribution score p_with - p_without; keep the edge when it exceeds tau."""
    p_with = check_probability(p_with, "p_with")
    p_without = check_probability(p_without, "p_without")
    tau = check_probability(tau, "tau")
    cas = p_with - p_without
    return CasResult(cas, cas > tau)


def attribution_floor(k_stages: int, eps_stage: float) -> float:
    """Worst-case attribution error floor 1 - (1 - eps)^k."""
    if k_stages < 1:
        raise ValueError("k_stages must be positive")
    eps_stage = check_probability(eps_stage, "eps_stage")
    if eps_stage >= 0.5:
        raise ValueError("eps_stage must be < 0.5")
    return 1.0 - (1.0 - eps_stage) ** k_stages

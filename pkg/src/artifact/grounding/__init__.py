"""Grounding: metric counts, conflict routing, adaptive retrieval and certified KG voting."""

from .bandit import BanditEnv, BanditRun, regret_bound, run_bandit_retrieval, run_bandit_seeds
from .kg import (
    NoCandidate,
    OracleResult,
    ToyKG,
    VoteResult,
    certified_radius,
    certify,
    exact_vote_shares,
    kg_vote,
    radius_oracle,
)
from .metrics import (
    ConflictInstance,
    ConflictType,
    Route,
    RoutingCost,
    attribution_floor,
    cas_score,
    metric_requirements,
    route_conflict,
    routing_cost,
)

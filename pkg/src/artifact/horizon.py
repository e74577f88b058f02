"""Architectural depth rules for transformer reasoning."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .chain.bounds import entropy_threshold, optimal_k, safe_length
from .chain.scaling import (
    Beam,
    BestOfNImperfect,
    BestOfNPerfect,
    SingleChainVerified,
    scaling_exponent,
    supervision_ratio,
)
from .core import check_probability

DEFAULT_C_HAT = 2.74
# Reference plan-length ceiling quoted for a 32-layer, 4096-wide model.
PLANNING_REFERENCE_STEPS = 89
# Reference horizons quoted for GPT-2 Small and Medium next to their recomputed values.
HORIZON_TABLE_REFERENCE = {
    "gpt2-small": {"L": 12, "d": 768, "table": 19.5},
    "gpt2-medium": {"L": 24, "d": 1024, "table": 24.2},
    "llama-2-7b": {"L": 32, "d": 4096, "table": 27.4},
}


@dataclass(frozen=True)
class ArchProfile:
    layers: int
    width: int
    c_hat: float = DEFAULT_C_HAT

    def __post_init__(self) -> None:
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.width < 3:
            raise ValueError("width must be >= 3")
        if self.c_hat < 0:
            raise ValueError("c_hat must be non-negative")


@dataclass(frozen=True)
class TaskProfile:
    depth: float
    per_step_error: float
    m_req: int = 1
    n_req: int = 1
    n_train: int = 1
    target_error: float = 0.05

    def __post_init__(self) -> None:
        if self.depth <= 0:
            raise ValueError("depth must be positive")
        check_probability(self.per_step_error, "per_step_error")
        if self.per_step_error >= 0.5:
            raise ValueError("per_step_error must be < 0.5")
        check_probability(self.target_error, "target_error")
        if self.m_req < 1:
            raise ValueError("m_req must be positive")
        if self.n_train < 1:
            raise ValueError("n_train must be positive")
        if self.n_req < self.n_train:
            raise ValueError("n_req must be >= n_train")


class Regime(str, enum.Enum):
    CHAIN_OF_THOUGHT = "ChainOfThought"
    KREDUNDANT_VERIFICATION = "KRedundantVerification"
    TOOL_DELEGATION = "ToolDelegation"


class Supervision(str, enum.Enum):
    PROCESS = "Process"
    OUTCOME = "Outcome"


class Strategy(str, enum.Enum):
    BEST_OF_N = "BestOfN"
    BEST_OF_N_WITH_PRM = "BestOfNWithPRM"
    BEAM = "Beam"
    SINGLE_CHAIN_VERIFIED = "SingleChainVerified"


def horizon_predict(arch: ArchProfile) -> float:
    """Deterministic horizon d* = c_hat ln L sqrt(ln d), natural logs."""
    return arch.c_hat * math.log(arch.layers) * math.sqrt(math.log(arch.width))


def decay_bound(delta: float, d_star: float, layers: int, width: int, c3: float = 1.0) -> float:
    """Upper bound exp(-c3 (delta - d*)^2 / (L^2 ln d)) on accuracy past the horizon."""
    if c3 <= 0:
        raise ValueError("c3 must be positive")
    if layers < 1 or width < 3:
        raise ValueError("need layers >= 1 and width >= 3")
    if delta <= d_star:
        return 1.0
    return math.exp(-c3 * (delta - d_star) ** 2 / (layers**2 * math.log(width)))


def schematic_decay(delta: float, d_star: float) -> float:
    """Illustrative curve exp(-(delta/d*)^2 ln 2), equal to 1/2 at the horizon."""
    if d_star <= 0:
        raise ValueError("d_star must be positive")
    return math.exp(-((delta / d_star) ** 2) * math.log(2.0))


def regime_classify(delta: float, d_star: float) -> Regime:
    """Three-way split at d* and 2 d*; boundary points take the cheaper regime."""
    if d_star <= 0:
        raise ValueError("d_star must be positive")
    if delta <= d_star:
        return Regime.CHAIN_OF_THOUGHT
    if delta <= 2 * d_star:
        return Regime.KREDUNDANT_VERIFICATION
    return Regime.TOOL_DELEGATION


@dataclass(frozen=True)
class ClcResult:
    ratio: float
    fails: bool


def clc_ratio(task: TaskProfile, d_star: float) -> ClcResult:
    """Composition-length ratio 2 m_req log2(n_req/n_train) / d*; fails when >= 1."""
    if d_star <= 0:
        raise ValueError("d_star must be positive")
    ratio = 2.0 * task.m_req * math.log2(task.n_req / task.n_train) / d_star
    return ClcResult(ratio, ratio >= 1.0)


@dataclass(frozen=True)
class PlanningCapacity:
    lower: float
    upper: float
    reference_steps: int = PLANNING_REFERENCE_STEPS


def planning_capacity(arch: ArchProfile, states: int, actions: int,
                      c_upper: float = 1.0, c_lower: float = 1.0) -> PlanningCapacity:
    """Plan-length bounds c_lower L ln d / ln(s a) and c_upper L^2 ln d / ln(s a)."""
    if states < 2 or actions < 2:
        raise ValueError("states and actions must be >= 2")
    if c_upper <= 0 or c_lower <= 0:
        raise ValueError("constants must be positive")
    denom = math.log(states) + math.log(actions)
    ln_d = math.log(arch.width)
    L = arch.layers
    return PlanningCapacity(c_lower * L * ln_d / denom, c_upper * L * L * ln_d / denom)


def compositional_ceiling(answer_space: int) -> float:
    """Accuracy ceiling 3/4 + 1/(2|Y|) for length generalisation."""
    if answer_space < 2:
        raise ValueError("answer_space must be >= 2")
    return 0.75 + 0.5 / answer_space


def finetune_envelope(d_star: float, d_test: float, acc_base_at_dstar: float,
                      c_env: float = 0.0) -> float:
    """Fine-tuned accuracy envelope (acc_base + c_env) d*/d_test, capped at 1."""
    check_probability(acc_base_at_dstar, "acc_base_at_dstar")
    if c_env < 0:
        raise ValueError("c_env must be non-negative")
    if d_test <= d_star:
        raise ValueError("envelope applies only beyond the horizon (d_test > d_star)")
    return min(1.0, (acc_base_at_dstar + c_env) * d_star / d_test)


def default_strategies(per_step_error: float) -> list:
    return [BestOfNImperfect(0.06), Beam(4), SingleChainVerified(per_step_error, 1.0)]


def _strategy_label(spec) -> Strategy:
    if isinstance(spec, BestOfNPerfect):
        return Strategy.BEST_OF_N_WITH_PRM
    if isinstance(spec, BestOfNImperfect):
        return Strategy.BEST_OF_N
    if isinstance(spec, Beam):
        return Strategy.BEAM
    return Strategy.SINGLE_CHAIN_VERIFIED


@dataclass(frozen=True)
class DesignPlan:
    d_star: float
    regime: Regime
    k_star: int
    n_star: int
    h_star: float
    supervision: Supervision
    strategy: Strategy
    strategy_exponent: float
    supervision_gain: float
    clc: ClcResult
    advisory: bool = False
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "d_star": self.d_star,
            "regime": self.regime.value,
            "k_star": self.k_star,
            "n_star": self.n_star,
            "h_star": self.h_star,
            "supervision": self.supervision.value,
            "strategy": self.strategy.value,
            "strategy_exponent": self.strategy_exponent,
            "supervision_gain": self.supervision_gain,
            "clc_ratio": self.clc.ratio,
            "clc_fails": self.clc.fails,
            "advisory": self.advisory,
            "notes": list(self.notes),
        }


def design_plan(arch: ArchProfile, task: TaskProfile, lam: float, gamma_hat: float,
                non_redundant: bool, strategies=None) -> DesignPlan:
    """Run the four-step design procedure end to end.

    Under tool delegation every downstream field is still computed but the
    plan is marked advisory.
    """
    d_star = horizon_predict(arch)
    regime = regime_classify(task.depth, d_star) if d_star > 0 else Regime.TOOL_DELEGATION
    notes = []
    k_star = optimal_k(task.depth, task.target_error, task.per_step_error)
    if regime is Regime.KREDUNDANT_VERIFICATION and k_star < 2:
        k_star = 2
        notes.append("k raised to 2 beyond the horizon")
    n_star = safe_length(task.per_step_error, task.target_error)
    h_star = entropy_threshold(lam, gamma_hat)
    supervision = Supervision.PROCESS if non_redundant else Supervision.OUTCOME
    gain = supervision_ratio(max(task.depth, 2.0)) if non_redundant else 1.0
    candidates = list(strategies) if strategies else default_strategies(task.per_step_error)
    scored = [(scaling_exponent(s), i, s) for i, s in enumerate(candidates)]
    best_alpha, _, best = max(scored, key=lambda t: (t[0], -t[1]))
    clc = clc_ratio(task, d_star) if d_star > 0 else ClcResult(math.inf, True)
    advisory = regime is Regime.TOOL_DELEGATION
    if advisory:
        notes.append("depth exceeds twice the horizon: delegate to a symbolic planner")
    return DesignPlan(d_star, regime, k_star, n_star, h_star, supervision,
                      _strategy_label(best), best_alpha, gain, clc, advisory, tuple(notes))

"""Chain-of-thought reliability toolkit."""

from .bounds import (
    chain_error_bound,
    entropy_threshold,
    exact_majority_chain_error,
    fano_lower_bound,
    kredundant_bound,
    kredundant_safe_length,
    majority_step_error,
    optimal_k,
    safe_length,
    simulate_chain,
)
from .scaling import (
    Allocation,
    Beam,
    BestOfNImperfect,
    BestOfNPerfect,
    InfeasibleBudget,
    ScalingFit,
    SingleChainVerified,
    allocation_optimum,
    effective_branching,
    fit_scaling,
    scaling_exponent,
    strategy_from_dict,
    success_curve,
    supervision_ratio,
    training_fraction_ratio,
)
from .stopping import (
    ChainModel,
    StoppingConfig,
    StoppingResult,
    absorbed_chain,
    estimate_spectral_gap,
    fixed_horizon_loss,
    planted_gap_chain,
    run_stopping,
    shannon_entropy,
    spectral_gap,
    stopping_oracle,
)

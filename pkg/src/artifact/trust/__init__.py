"""Incentive, verification-cost and welfare calculators for multi-agent deployments."""

from .incentives import (
    OSP_SIGMA_RATIO_LIMIT,
    OSP_TABLE,
    AgentModel,
    ClampedBound,
    DetectionBudget,
    NoReversal,
    OspEpsilon,
    VcgInstance,
    coalition_stability_bound,
    osp_epsilon,
    smd_sample_complexity,
    vcg_counterexample,
)
from .mechanism import (
    AuditResult,
    GuardTripped,
    Marketplace,
    MarketplaceResult,
    MechanismTree,
    NegativeMargin,
    Node,
    audit_tree,
    build_millipede,
    run_marketplace,
    walk_tree,
    welfare_of,
)
from .tax import (
    BERT_VERIFIER_REFERENCE,
    FOLDING_TABLE,
    Activation,
    Conditionality,
    FoldingCosts,
    IopFloor,
    TaxConfig,
    TaxResult,
    folding_costs,
    iop_floor,
    nonlinearity_tax,
)
from .welfare import (
    CALIBRATED_COST_VER,
    ExpBase,
    Scenario,
    SelectiveResult,
    run_selective,
    selective_alpha,
    selective_loss_closed_form,
    soundness_error,
    welfare_loss,
)

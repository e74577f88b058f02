"""The sixteen boundary/cost/rule rows with live evaluators."""

from __future__ import annotations

import inspect
import math
import json
from dataclasses import dataclass

from .adaptation.collapse import collapse_lower_bound
from .adaptation.editing import EditConfig, edit_capacity
from .adaptation.lora import rank_ceiling
from .adaptation.preference import PrefProblem, pref_regime
from .chain.bounds import chain_error_bound
from .chain.scaling import supervision_ratio
from .core import RULE_BY_SPEC, CostUnits, SpecVerdict
from .grounding.bandit import regret_bound
from .grounding.kg import certified_radius
from .grounding.metrics import (
    DEEP_AS_SHALLOW_PP,
    attribution_floor,
    metric_requirements,
)
from .horizon import ArchProfile, decay_bound, horizon_predict
from .trust.incentives import AgentModel, osp_epsilon
from .trust.mechanism import Marketplace
from .trust.tax import TaxConfig, nonlinearity_tax
from .trust.welfare import ExpBase, Scenario, welfare_loss


@dataclass(frozen=True)
class CatalogueRow:
    spec_id: int
    domain: str
    boundary: str
    violation_cost: str
    design_rule: str


ROWS = (
    CatalogueRow(1, "computation", "task outside what one attention stack expresses",
                 "task intractable in-architecture", "delegate to external tools"),
    CatalogueRow(2, "computation", "depth d* = c ln L sqrt(ln d)",
                 "accuracy decays past d*", "delegate at d*, verify beyond"),
    CatalogueRow(3, "computation", "chain error 1 - (1 - eps)^n",
                 "per-step errors compound", "entropy stopping, per-step verification"),
    CatalogueRow(4, "computation", "outcome/process ratio n / ln n",
                 "too little supervision leaves error unbounded", "fund process supervision"),
    CatalogueRow(5, "adaptation", "complexity m r (d + k) / N",
                 "vacuous generalisation bound", "cap rank, scale data with rank"),
    CatalogueRow(6, "adaptation", "misspecification gamma > gap / n",
                 "quadratic sample blow-up", "measure gamma, prefer RLHF when positive"),
    CatalogueRow(7, "adaptation", "T^2 d_eff / n_min > 128 pi",
                 "total variation to the real distribution tends to 1", "retain real data"),
    CatalogueRow(8, "adaptation", "edits K > K*",
                 "locality breaks", "retrain past the edit capacity"),
    CatalogueRow(9, "grounding", "pipeline stages k >= 2",
                 "(k-1)-dimensional ambiguity", "one independent metric per stage"),
    CatalogueRow(10, "grounding", "meta information below half the claim entropy",
                 "deep conflicts routed shallow lose accuracy", "classify before routing"),
    CatalogueRow(11, "grounding", "uncertainty-weighted retrieval threshold",
                 "d sqrt(T ln T) regret", "step-level adaptive retrieval"),
    CatalogueRow(12, "grounding", "correlational attribution",
                 "precision floor from compounding stage error", "interventional attribution"),
    CatalogueRow(13, "grounding", "edits beyond the certified radius",
                 "undefended poisoning succeeds", "certified subgraph aggregation"),
    CatalogueRow(14, "trust", "prompt-dependent preferences",
                 "VCG not incentive compatible", "lookahead-bounded OSP mechanism"),
    CatalogueRow(15, "trust", "per-operation proof cost below log p",
                 "IOP unsatisfiable", "reduce the number of non-linearities"),
    CatalogueRow(16, "trust", "mechanism or verification absent",
                 "loss linear in tasks or agents", "deploy both jointly"),
)


def _v(spec_id, boundary, satisfied, cost, units, vacuous=False):
    return SpecVerdict(spec_id, float(boundary), bool(satisfied), float(cost), units,
                       RULE_BY_SPEC[spec_id], vacuous)


def _s1(L=32, d=4096, depth=12.0):
    ds = horizon_predict(ArchProfile(L, d))
    ok = depth <= 2 * ds
    cost = 0.0 if ok else 1.0 - decay_bound(depth, ds, L, d)
    return _v(1, 2 * ds, ok, cost, CostUnits.PROBABILITY)


def _s2(L=32, d=4096, depth=12.0):
    ds = horizon_predict(ArchProfile(L, d))
    return _v(2, ds, depth <= ds, 1.0 - decay_bound(depth, ds, L, d), CostUnits.PROBABILITY)


def _s3(n=15, eps=0.05, target=0.05):
    b = chain_error_bound(n, eps)
    return _v(3, b, b <= target, b, CostUnits.PROBABILITY)


def _s4(n=20, eta=0.0, process=True):
    r = supervision_ratio(n, eta)
    return _v(4, r, process, 0.0 if process else r, CostUnits.MULTIPLIER)


def _s5(d=8192, k=4096, N=52000, rank=16):
    ceil = rank_ceiling(d, k, N)
    return _v(5, ceil, rank <= ceil, max(0.0, rank / ceil - 1.0), CostUnits.MULTIPLIER)


def _s6(n=500, gap=0.008, gamma=0.0):
    r = pref_regime(PrefProblem(n, gap, gamma))
    ok = gamma <= r.gamma_star
    return _v(6, r.gamma_star, ok, 0.0 if ok else n / math.log(n), CostUnits.MULTIPLIER)


def _s7(T=10, d_eff=8.0, n_min=500.0):
    lhs = T * T * d_eff / n_min
    return _v(7, 128 * math.pi, lhs <= 128 * math.pi,
              collapse_lower_bound(T, d_eff, n_min), CostUnits.PROBABILITY)


def _s8(d=4096, alpha=2.1, K=10):
    ks = edit_capacity(EditConfig(d, alpha)).k_star
    return _v(8, ks, K <= ks, 0.0 if K <= ks else K / ks - 1.0, CostUnits.MULTIPLIER)


def _s9(k=3, metrics=3, resolution=0.1):
    req = metric_requirements(k, resolution)
    ok = metrics >= req.min_metrics
    return _v(9, req.min_metrics, ok, 0.0 if ok else req.ambiguity_count_order,
              CostUnits.MULTIPLIER)


def _s10(i_meta=1.0, h_claim=1.5):
    ok = i_meta >= h_claim / 2
    return _v(10, h_claim / 2, ok, 0.0 if ok else DEEP_AS_SHALLOW_PP, CostUnits.PERCENTAGE_POINTS)


def _s11(T=1000, d=4, delta=0.05):
    r = regret_bound(T, d, delta)
    return _v(11, r, True, r, CostUnits.SAMPLE_COUNT)


def _s12(k=5, eps=0.10, interventional=True):
    f = attribution_floor(k, eps)
    return _v(12, f, interventional, 0.0 if interventional else f, CostUnits.PROBABILITY)


def _s13(p_A=0.92, p=0.7, edits=1):
    r = certified_radius(p_A, p)
    return _v(13, r, edits <= r, 0.0 if edits <= r else 0.9, CostUnits.PROBABILITY)


def _s14(eps1=0.138, sigma_ratio=0.0436, T=10, tolerance=0.16):
    e = osp_epsilon(AgentModel(eps1, sigma_ratio), T, 1.0).eps_total
    return _v(14, e, e <= tolerance, e, CostUnits.PROBABILITY)


def _s15(log_p=128.0, tau_op=150.2):
    t = nonlinearity_tax(TaxConfig(log_p=log_p))
    return _v(15, t.floor, tau_op >= t.floor, t.headline, CostUnits.MULTIPLIER)


def _s16(eps=0.16, kappa=128.0, n_agents=1, m_tasks=1, v_max=1.0, gap=0.1,
         mechanism=True, verification=True):
    m = Marketplace([v_max] * m_tasks, [[1.0] * m_tasks] * n_agents, [gap] * m_tasks,
                    [1.0] * n_agents)
    both = welfare_loss(Scenario.BOTH, m, eps, kappa, ExpBase.TWO)
    if mechanism and verification:
        loss = both
    elif mechanism:
        loss = welfare_loss(Scenario.NO_VERIFICATION, m, eps, kappa)
    else:
        loss = welfare_loss(Scenario.NO_MECHANISM, m, eps, kappa)
    return _v(16, both / v_max, mechanism and verification, loss / v_max,
              CostUnits.WELFARE_FRACTION)


EVALUATORS = {i + 1: f for i, f in enumerate(
    (_s1, _s2, _s3, _s4, _s5, _s6, _s7, _s8, _s9, _s10, _s11, _s12, _s13, _s14, _s15, _s16))}


def parameters(spec_id: int) -> dict:
    """Default parameters of a row's evaluator."""
    sig = inspect.signature(EVALUATORS[spec_id])
    return {k: p.default for k, p in sig.parameters.items()}


def evaluate(spec_id: int, **params) -> SpecVerdict:
    """Evaluate one row; unknown parameter names are rejected."""
    if spec_id not in EVALUATORS:
        raise ValueError(f"spec_id must be in 1..16, got {spec_id}")
    allowed = parameters(spec_id)
    unknown = set(params) - set(allowed)
    if unknown:
        raise ValueError(f"row {spec_id} has no parameters {sorted(unknown)}")
    cast = {k: type(allowed[k])(v) if not isinstance(allowed[k], bool) else _as_bool(v)
            for k, v in params.items()}
    return EVALUATORS[spec_id](**cast)


def _as_bool(v) -> bool:
    if isinstance(v, str):
        return v.lower() in ("1", "true", "yes")
    return bool(v)


def catalogue(params_by_row: dict | None = None) -> list[dict]:
    """All sixteen rows with their live verdicts."""
    params_by_row = params_by_row or {}
    out = []
    for row in ROWS:
        verdict = evaluate(row.spec_id, **params_by_row.get(row.spec_id, {}))
        out.append({
            "spec_id": row.spec_id,
            "domain": row.domain,
            "boundary": row.boundary,
            "violation_cost": row.violation_cost,
            "design_rule": row.design_rule,
            "parameters": {**parameters(row.spec_id), **params_by_row.get(row.spec_id, {})},
            "verdict": verdict.to_dict(),
        })
    return out


ROW_KEYS = ("spec_id", "domain", "boundary", "violation_cost", "design_rule", "parameters",
            "verdict")


def load_catalogue(text: str) -> list[dict]:
    """Parse ``catalogue --json`` output, re-validating every verdict."""
    rows = json.loads(text)
    if not isinstance(rows, list):
        raise ValueError("catalogue JSON must be a list of rows")
    out = []
    for r in rows:
        if set(r) != set(ROW_KEYS):
            raise ValueError(f"row keys must be {ROW_KEYS}")
        verdict = SpecVerdict.from_dict(r["verdict"])
        if verdict.spec_id != r["spec_id"]:
            raise ValueError("verdict belongs to a different row")
        out.append({**r, "verdict": verdict.to_dict()})
    return out

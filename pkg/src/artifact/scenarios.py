"""Config-driven scenario runners behind the command-line interface.

Each runner takes a params dataclass plus (seed, workers) and returns a
``Outputs`` bundle of CSV tables, JSON documents and text dumps. Numbers in
CSV and JSON are written with 12 significant digits.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import compose as cmp
from .adaptation import (
    CollapseConfig,
    PrefProblem,
    quadratic_fit_r2,
    simulate_collapse,
    simulate_preference,
)
from .chain import (
    StoppingConfig,
    chain_error_bound,
    exact_majority_chain_error,
    fixed_horizon_loss,
    kredundant_bound,
    planted_gap_chain,
    run_stopping,
    simulate_chain,
    spectral_gap,
    stopping_oracle,
)
from .core import check_probability, derive_trial_seed
from .grounding import (
    BanditEnv,
    ToyKG,
    certified_radius,
    exact_vote_shares,
    kg_vote,
    radius_oracle,
    regret_bound,
    run_bandit_seeds,
)
from .horizon import ArchProfile, TaskProfile, design_plan, horizon_predict
from .trust import (
    AgentModel,
    Marketplace,
    audit_tree,
    build_millipede,
    osp_epsilon,
    run_marketplace,
    run_selective,
    selective_loss_closed_form,
)

DATA = resources.files("artifact") / "data"


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""


@dataclass
class Outputs:
    csv: dict = field(default_factory=dict)  # name -> (header, rows)
    json: dict = field(default_factory=dict)
    text: dict = field(default_factory=dict)


def build_params(cls, values: dict | None):
    """Instantiate a params dataclass, rejecting unknown keys."""
    values = dict(values or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def data_path(name: str) -> Path:
    """Resolve a shipped fixture name, or pass through an existing path."""
    p = Path(name)
    if p.exists():
        return p
    q = Path(str(DATA / name))
    if q.exists():
        return q
    raise ConfigError(f"fixture not found: {name}")


# ---------------------------------------------------------------- horizon

@dataclass
class HorizonParams:
    L: int = 32
    d: int = 4096
    c_hat: float = 2.74
    depth: float = 15.0
    per_step_error: float = 0.05
    target_error: float = 0.05
    lam: float = 0.025
    gamma_hat: float = 0.3
    non_redundant: bool = True
    m_req: int = 1
    n_req: int = 1
    n_train: int = 1


def run_horizon(p: HorizonParams, seed: int, workers: int) -> Outputs:
    arch = ArchProfile(p.L, p.d, p.c_hat)
    task = TaskProfile(p.depth, p.per_step_error, p.m_req, p.n_req, p.n_train, p.target_error)
    plan = design_plan(arch, task, p.lam, p.gamma_hat, p.non_redundant)
    out = Outputs()
    out.json["design_plan.json"] = plan.to_dict()
    out.csv["horizon.csv"] = (["L", "d", "c_hat", "d_star", "depth", "regime", "k_star"],
                              [[p.L, p.d, p.c_hat, horizon_predict(arch), p.depth,
                                plan.regime.value, plan.k_star]])
    return out


# ------------------------------------------------------------------ chain

@dataclass
class ChainParams:
    n: list = field(default_factory=lambda: [2, 5, 10, 15, 20])
    eps: list = field(default_factory=lambda: [0.01, 0.03, 0.05, 0.1])
    k: int = 0
    trials: int = 100_000


def run_chain(p: ChainParams, seed: int, workers: int) -> Outputs:
    rows = []
    for idx, (n, eps) in enumerate((n, e) for n in p.n for e in p.eps):
        rep = simulate_chain(int(n), float(eps), p.k, p.trials, derive_trial_seed(seed, idx),
                             workers)
        if p.k == 0:
            bound = chain_error_bound(int(n), float(eps))
        else:
            bound = exact_majority_chain_error(int(n), float(eps), p.k)
        rel = abs(rep.estimate - bound) / bound if bound > 0 else 0.0
        upper = kredundant_bound(int(n), float(eps), p.k) if p.k >= 2 else bound
        rows.append([n, eps, p.k, p.trials, bound, upper, rep.estimate, rep.ci_low,
                     rep.ci_high, rel, int(n) * float(eps) < 1])
    out = Outputs()
    out.csv["chain_sim.csv"] = (["n", "eps", "k", "trials", "exact", "upper_bound", "estimate",
                                 "ci_low", "ci_high", "rel_err", "in_scope"], rows)
    return out


# --------------------------------------------------------------- stopping

@dataclass
class StopParams:
    gamma: float = 0.3
    n_undecided: int = 12
    answers: int = 4
    commit_error: float = 0.1
    lam: float = 0.025
    ema_coeff: float = 0.3
    n_max: int = 100
    trials: int = 20_000
    chains: int = 10
    oracle_horizon: int = 200
    fixed_steps: list = field(default_factory=lambda: [0, 5, 10, 20])
    slack: float = 0.05


def mixing_time(gap: float, states: int) -> float:
    """Mixing-time proxy ln(states) / gap."""
    return math.log(states) / gap


def run_stop(p: StopParams, seed: int, workers: int) -> Outputs:
    rows = []
    for i in range(p.chains):
        model = planted_gap_chain(p.gamma, p.n_undecided, p.answers, p.commit_error, seed=i)
        g = spectral_gap(model)
        cfg = StoppingConfig(p.lam, g, p.ema_coeff, p.n_max)
        res = run_stopping(model, cfg, p.trials, derive_trial_seed(seed, i), workers)
        oracle = stopping_oracle(model, p.lam, p.oracle_horizon)
        t_mix = mixing_time(g, model.n_states)
        fixed = [fixed_horizon_loss(model, p.lam, s) for s in p.fixed_steps]
        rows.append([i, g, cfg.threshold, res.mean_loss, res.loss_se, res.mean_tau, oracle,
                     t_mix, oracle + p.lam * t_mix + p.slack, min(fixed)])
    out = Outputs()
    out.csv["stopping.csv"] = (["chain", "gap", "h_star", "mean_loss", "loss_se", "mean_tau",
                                "oracle", "t_mix", "allowed", "best_fixed"], rows)
    return out


# ------------------------------------------------------------- adaptation

@dataclass
class AdaptParams:
    kind: str = "collapse"
    dim: int = 8
    n_per_gen: int = 500
    generations: int = 100
    mode: str = "Replacement"
    rho: float = 0.0
    runs: int = 20
    n_items: list = field(default_factory=lambda: [10, 20])
    gap: float = 0.01
    gamma: float = 0.0
    noise: str = "none"
    trials: int = 1000

    def __post_init__(self):
        if self.kind not in ("collapse", "preference"):
            raise ValueError("adapt kind must be 'collapse' or 'preference'")


def run_adapt(p: AdaptParams, seed: int, workers: int) -> Outputs:
    out = Outputs()
    if p.kind == "collapse":
        cfg = CollapseConfig(p.dim, p.n_per_gen, p.generations, p.mode, p.rho)
        kl = simulate_collapse(cfg, seed, p.runs, workers)
        mean = kl.mean(axis=0)
        T = np.arange(kl.shape[1])
        out.csv["collapse.csv"] = (["generation", "mean_kl", "sd_kl"],
                                   [[t, mean[t], kl[:, t].std()] for t in T])
        a, r2 = quadratic_fit_r2(T[1:], mean[1:])
        out.json["collapse_fit.json"] = {"quadratic_coef": a, "r_squared": r2}
        return out
    rows = []
    for i, n in enumerate(p.n_items):
        res = simulate_preference(PrefProblem(int(n), p.gap, p.gamma), p.noise, p.trials,
                                  derive_trial_seed(seed, i), workers)
        rows.append([n, p.gap, p.gamma, p.noise, res.report.estimate, res.report.ci_low,
                     res.report.ci_high, res.quantile, res.censored])
    out.csv["preference.csv"] = (["n_items", "gap", "gamma", "noise", "median", "ci_low",
                                  "ci_high", "quantile", "censored"], rows)
    return out


# -------------------------------------------------------------- grounding

@dataclass
class GroundParams:
    kind: str = "bandit"
    horizon: list = field(default_factory=lambda: [250, 1000, 4000])
    delta: float = 0.05
    seeds: int = 30
    fixture: str = "kg/decoy_2paths.tsv"
    head: str = "h"
    relation: str = "r"
    p: float = 0.7
    L: int = 10_000
    extra_edits: int = 1

    def __post_init__(self):
        if self.kind not in ("bandit", "kg"):
            raise ValueError("ground kind must be 'bandit' or 'kg'")


def run_ground(p: GroundParams, seed: int, workers: int) -> Outputs:
    out = Outputs()
    if p.kind == "bandit":
        rows = []
        seeds = [derive_trial_seed(seed, i) for i in range(p.seeds)]
        for T in p.horizon:
            regrets = run_bandit_seeds(BanditEnv(horizon=int(T)), p.delta, seeds, workers)
            rows.append([T, p.delta, p.seeds, regrets.mean(), regrets.max(),
                         regret_bound(int(T), 4, p.delta)])
        out.csv["bandit.csv"] = (["T", "delta", "seeds", "mean_regret", "max_regret",
                                  "envelope"], rows)
        return out
    kg = ToyKG.load(data_path(p.fixture))
    query = (p.head, p.relation)
    shares = exact_vote_shares(kg, query, p.p)
    winner = max(sorted(shares), key=lambda c: shares[c])
    radius = certified_radius(min(shares[winner], 1 - 1e-12), p.p)
    vote = kg_vote(kg, query, p.L, p.p, seed, workers=workers)
    at = radius_oracle(kg, query, p.p, radius, workers=workers)
    beyond = radius_oracle(kg, query, p.p, radius + p.extra_edits, workers=workers)
    out.csv["kg.csv"] = (["fixture", "winner", "p_A_exact", "p_A_mc", "radius",
                          "robust_at_radius", "robust_beyond"],
                         [[p.fixture, winner, shares[winner], vote.p_A, radius, at.robust,
                           beyond.robust]])
    return out


# ------------------------------------------------------------------ trust

@dataclass
class TrustParams:
    kind: str = "marketplace"
    market: str = "markets/four_by_four.yaml"
    eps1: float = 0.0
    sigma_pi: float = 0.0
    sigma_ratio_limit: float = 0.05
    trials: int = 10_000
    alpha: float = 0.3
    kappa: float = 128.0

    def __post_init__(self):
        if self.kind not in ("marketplace", "selective"):
            raise ValueError("trust kind must be 'marketplace' or 'selective'")
        check_probability(self.alpha, "alpha")


def run_trust(p: TrustParams, seed: int, workers: int) -> Outputs:
    market = Marketplace.load(data_path(p.market))
    agent = AgentModel(p.eps1, p.sigma_pi)
    tree = build_millipede(market, p.sigma_ratio_limit, sigma_pi=p.sigma_pi)
    out = Outputs()
    out.text["tree.txt"] = tree.dump() + "\n"
    if p.kind == "marketplace":
        audit = audit_tree(tree, market)
        res = run_marketplace(tree, market, agent, p.trials, seed, workers)
        bound = osp_epsilon(agent, max(1, len(tree.decision_nodes())),
                            min((n.margin for n in tree.decision_nodes() if n.margin > 0),
                                default=1.0)).eps_total
        out.csv["marketplace.csv"] = (
            ["market", "eps1", "sigma_pi", "trials", "welfare", "violations", "decisions",
             "violation_rate", "ci_low", "ci_high", "eps_bound", "audit_ok", "min_margin"],
            [[p.market, p.eps1, p.sigma_pi, p.trials, res.welfare.estimate, res.violations,
              res.decisions, res.violation_rate.estimate, res.violation_rate.ci_low,
              res.violation_rate.ci_high, bound, audit.ok, audit.min_margin]])
        return out
    res = run_selective(market, tree, p.alpha, p.kappa, p.trials, seed, agents=agent,
                        workers=workers)
    gap = max(market.gaps)
    closed = selective_loss_closed_form(p.eps1, p.alpha, gap, p.kappa)
    out.csv["selective.csv"] = (
        ["market", "alpha", "eps1", "trials", "loss", "ci_low", "ci_high", "closed_form",
         "verified_fraction"],
        [[p.market, p.alpha, p.eps1, p.trials, res.loss.estimate, res.loss.ci_low,
          res.loss.ci_high, closed, res.verified_fraction]])
    return out


# ---------------------------------------------------------------- compose

@dataclass
class ComposeParams:
    n: float = 12.0
    eps: float = 0.03
    q: float = 0.8
    eta: float = 0.7
    n_deep: float = 27.0
    q_attenuation: float = 0.6
    n_shallow: float = 5.0
    cost_eps: float = 1.0
    cost_q: float = 1.0


def run_compose(p: ComposeParams, seed: int, workers: int) -> Outputs:
    g = cmp.joint_reliability(cmp.CompositionParams(p.n, p.eps, p.q, p.eta))
    att = cmp.marginal_attenuation(
        cmp.CompositionParams(p.n_deep, p.eps, p.q_attenuation, p.eta), p.n_shallow)
    try:
        nc = cmp.crossover_depth(p.eps, p.eta, p.q_attenuation, p.cost_eps, p.cost_q)
        flag = None
    except cmp.NoRoot as exc:
        nc, flag = None, str(exc)
    out = Outputs()
    out.json["compose.json"] = {
        "joint_reliability": g,
        "marginal_at_n": att.marginal_at_n,
        "marginal_at_shallow": att.marginal_at_shallow,
        "attenuation": att.attenuation,
        "crossover_depth": nc,
        "crossover_flag": flag,
    }
    sweep = cmp.attenuation_sweep(p.n_shallow)
    out.csv["attenuation_sweep.csv"] = (
        ["min", "p25", "median", "p75", "max"],
        [[sweep.min(), *np.percentile(sweep, [25, 50, 75]), sweep.max()]])
    return out


COMMANDS = {
    "horizon": (HorizonParams, run_horizon),
    "chain": (ChainParams, run_chain),
    "stop": (StopParams, run_stop),
    "adapt": (AdaptParams, run_adapt),
    "ground": (GroundParams, run_ground),
    "trust": (TrustParams, run_trust),
    "compose": (ComposeParams, run_compose),
}

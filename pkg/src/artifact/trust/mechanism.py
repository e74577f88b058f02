"""Marketplace model, millipede clinching tree and its Monte Carlo execution."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..core import SimReport, check_seed, parallel_map, trial_blocks, trial_rng
from .incentives import OSP_SIGMA_RATIO_LIMIT, AgentModel


@dataclass(frozen=True)
class Marketplace:
    values: tuple  # V_j per task
    competence: tuple  # q[i][j], agents x tasks
    gaps: tuple  # Delta_j per task
    budgets: tuple  # per agent
    costs: tuple | None = None  # c[i][j]; zeros when omitted

    def __post_init__(self) -> None:
        V = np.asarray(self.values, dtype=float)
        q = np.asarray(self.competence, dtype=float)
        if V.ndim != 1 or V.size < 1 or np.any(V <= 0):
            raise ValueError("values must be a non-empty vector of positive reals")
        if q.ndim != 2 or q.shape[1] != V.size or q.shape[0] < 1:
            raise ValueError("competence must be an agents x tasks matrix")
        if np.any((q < 0) | (q > 1)):
            raise ValueError("competence entries must lie in [0, 1]")
        gaps = np.asarray(self.gaps, dtype=float)
        if gaps.shape != V.shape or np.any((gaps < 0) | (gaps > 1)):
            raise ValueError("gaps must be one probability per task")
        b = np.asarray(self.budgets, dtype=float)
        if b.shape != (q.shape[0],) or np.any(b < 0):
            raise ValueError("budgets must be one non-negative value per agent")
        c = np.zeros_like(q) if self.costs is None else np.asarray(self.costs, dtype=float)
        if c.shape != q.shape or np.any(c < 0):
            raise ValueError("costs must be a non-negative agents x tasks matrix")
        for name, arr in (("values", V), ("competence", q), ("gaps", gaps),
                          ("budgets", b), ("costs", c)):
            object.__setattr__(self, name, tuple(map(tuple, arr)) if arr.ndim == 2 else tuple(arr))

    @property
    def n_agents(self) -> int:
        return len(self.competence)

    @property
    def m_tasks(self) -> int:
        return len(self.values)

    @property
    def v_max(self) -> float:
        return max(self.values)

    @property
    def v_min(self) -> float:
        return min(self.values)

    @classmethod
    def from_dict(cls, d: dict) -> "Marketplace":
        allowed = {"values", "competence", "gaps", "budgets", "costs", "name"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown marketplace keys: {sorted(unknown)}")
        return cls(d["values"], d["competence"], d["gaps"], d["budgets"], d.get("costs"))

    @classmethod
    def load(cls, path) -> "Marketplace":
        with open(Path(path)) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def optimal_welfare(self) -> float:
        """Upper bound sum_j V_j max_i q_ij, ignoring budgets."""
        q = np.asarray(self.competence)
        return float(np.dot(self.values, q.max(axis=0)))


class GuardTripped(ValueError):
    pass


class NegativeMargin(ValueError):
    pass


@dataclass
class Node:
    """Clinching offer of ``task`` to ``agent`` at ``price``, or a terminal leaf."""

    agent: int = -1
    task: int = -1
    price: float = 0.0
    payoff: float = 0.0  # agent's net payoff from accepting
    margin: float = 0.0
    dominant: str = "accept"
    accept: "Node | None" = None
    reject: "Node | None" = None
    allocation: dict = field(default_factory=dict)  # task -> agent, leaves only
    payments: dict = field(default_factory=dict)  # agent -> total price, leaves only

    @property
    def is_leaf(self) -> bool:
        return self.accept is None


@dataclass
class MechanismTree:
    root: Node
    order: tuple  # agent processing order
    sigma_ratio: float

    def decision_nodes(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            if not n.is_leaf:
                out.append(n)
                stack.extend([n.reject, n.accept])
        return out

    def greedy_leaf(self) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.accept if node.dominant == "accept" else node.reject
        return node

    def dump(self) -> str:
        """Indented text rendering of the game tree."""
        lines = []

        def walk(n: Node, depth: int, tag: str) -> None:
            pad = "  " * depth
            if n.is_leaf:
                alloc = ", ".join(f"t{j}->a{i}" for j, i in sorted(n.allocation.items()))
                lines.append(f"{pad}{tag}leaf [{alloc}]")
                return
            lines.append(f"{pad}{tag}a{n.agent} offered t{n.task} at {n.price:.6g} "
                         f"(payoff {n.payoff:.6g}, margin {n.margin:.6g}, {n.dominant})")
            walk(n.accept, depth + 1, "acc: ")
            walk(n.reject, depth + 1, "rej: ")

        walk(self.root, 0, "")
        return "\n".join(lines)


def _price(q: np.ndarray, i: int, j: int, V: np.ndarray) -> float:
    others = np.delete(q[:, j], i)
    q2 = float(others.max()) if others.size else 0.0
    return float(V[j] * q2 / q[i, j])


def _offer(market_arrays, i, unallocated, declined, budget):
    """Best affordable, individually rational offer for agent i, or None."""
    V, q, c = market_arrays
    best = None
    for j in sorted(unallocated):
        if j in declined or q[i, j] <= 0:
            continue
        p = _price(q, i, j, V)
        if p > budget:
            continue
        u = V[j] * q[i, j] - c[i, j] - p
        if u < 0:
            continue
        if best is None or u > best[2]:
            best = (j, p, u)
    return best


def build_millipede(market: Marketplace, sigma_ratio_limit: float = OSP_SIGMA_RATIO_LIMIT,
                    sigma_pi: float = 0.0, delta_min: float | None = None) -> MechanismTree:
    """Clinching game tree with a lookahead-2 OSP margin at every node.

    Agents are processed by descending min(budget, max_j V_j q_ij). Each
    agent is repeatedly offered the unallocated task with the highest
    non-negative net payoff it can afford; declining removes the task from
    its own offers only. The guard compares sigma_pi against delta_min,
    which defaults to the smallest positive margin in the tree.
    """
    V = np.asarray(market.values)
    q = np.asarray(market.competence)
    c = np.asarray(market.costs)
    arrays = (V, q, c)
    keys = [min(market.budgets[i], float(np.max(V * q[i]))) for i in range(market.n_agents)]
    order = tuple(sorted(range(market.n_agents), key=lambda i: (-keys[i], i)))

    def build(pos, unallocated, declined, budget, alloc, pays):
        while pos < len(order):
            i = order[pos]
            offer = _offer(arrays, i, unallocated, declined, budget)
            if offer is not None:
                break
            pos, declined = pos + 1, frozenset()
            if pos < len(order):
                budget = market.budgets[order[pos]]
        else:
            return Node(allocation=dict(alloc), payments=dict(pays))
        j, p, u = offer
        node = Node(agent=i, task=j, price=p, payoff=u)
        acc_pays = dict(pays)
        acc_pays[i] = acc_pays.get(i, 0.0) + p
        node.accept = build(pos, unallocated - {j}, declined, budget - p,
                            {**alloc, j: i}, acc_pays)
        node.reject = build(pos, unallocated, declined | {j}, budget, alloc, pays)
        nxt_acc = _next_offer_payoff(node.accept, i)
        nxt_rej = _next_offer_payoff(node.reject, i)
        accept_worst = u
        reject_best = max(0.0, nxt_rej)
        if accept_worst >= reject_best:
            node.dominant, node.margin = "accept", accept_worst - reject_best
        elif u + max(0.0, nxt_acc) <= 0.0:
            node.dominant, node.margin = "reject", -(u + max(0.0, nxt_acc))
        else:
            raise NegativeMargin(f"agent {i} task {j}: no obviously dominant action")
        return node

    first_budget = market.budgets[order[0]]
    root = build(0, frozenset(range(market.m_tasks)), frozenset(), first_budget, {}, {})
    tree = MechanismTree(root, order, 0.0)
    margins = [n.margin for n in tree.decision_nodes() if n.margin > 0]
    if delta_min is None:
        delta_min = min(margins) if margins else 0.0
    if sigma_pi > 0:
        ratio = sigma_pi / delta_min if delta_min > 0 else float("inf")
    else:
        ratio = 0.0
    tree.sigma_ratio = ratio
    if ratio > sigma_ratio_limit:
        raise GuardTripped(f"sigma_pi/delta_min = {ratio:.4g} exceeds {sigma_ratio_limit}")
    return tree


def _next_offer_payoff(node: Node, agent: int) -> float:
    """Payoff of the agent's next offer in this subtree, or 0 when it gets none."""
    if node.is_leaf or node.agent != agent:
        return 0.0
    return node.payoff


@dataclass(frozen=True)
class AuditResult:
    nodes: int
    min_margin: float
    mismatches: int

    @property
    def ok(self) -> bool:
        return self.mismatches == 0 and self.min_margin >= 0


def audit_tree(tree: MechanismTree, market: Marketplace) -> AuditResult:
    """Re-derive every node's OSP comparison by traversing the tree.

    Payoffs are recomputed from market data and the leaves reached, not
    from the stored margins. Within lookahead 2 the worst case of accepting
    is the accept payoff (later offers can be declined) and the best case
    of rejecting is the best payoff reachable at the agent's next offer.
    """
    V = np.asarray(market.values)
    q = np.asarray(market.competence)
    c = np.asarray(market.costs)
    nodes = tree.decision_nodes()
    mismatches = 0
    min_margin = float("inf")
    for n in nodes:
        u = V[n.task] * q[n.agent, n.task] - c[n.agent, n.task] - _price(q, n.agent, n.task, V)
        reach = []
        stack = [n.reject]
        while stack:  # first decision node of this agent on every reject branch
            m = stack.pop()
            if m.is_leaf:
                reach.append(0.0)
            elif m.agent == n.agent:
                reach.append(max(0.0, V[m.task] * q[m.agent, m.task] - c[m.agent, m.task]
                                 - _price(q, m.agent, m.task, V)))
            else:
                stack.extend([m.accept, m.reject])
        margin = u - max(reach)
        if n.dominant != "accept" or abs(margin - n.margin) > 1e-12:
            mismatches += 1
        min_margin = min(min_margin, margin)
    return AuditResult(len(nodes), min_margin if nodes else 0.0, mismatches)


def welfare_of(allocation: dict, market: Marketplace) -> float:
    return float(sum(market.values[j] * market.competence[i][j] for j, i in allocation.items()))


@dataclass(frozen=True)
class MarketplaceResult:
    welfare: SimReport
    violation_rate: SimReport
    allocation: dict  # rational-path allocation
    violations: int
    decisions: int


def _agents_list(agents, n):
    if isinstance(agents, AgentModel):
        return [agents] * n
    agents = list(agents)
    if len(agents) != n:
        raise ValueError("need one AgentModel per agent")
    return agents


def walk_tree(tree: MechanismTree, agents, rng) -> tuple[Node, int, int]:
    """Play one path through the tree; returns (leaf, violations, decisions)."""
    node = tree.root
    viol = steps = 0
    while not node.is_leaf:
        a = agents[node.agent]
        signed = node.margin if node.dominant == "accept" else -node.margin
        if a.sigma_pi > 0:
            signed += a.sigma_pi * (1.0 if rng.random() < 0.5 else -1.0)
        take_accept = signed >= 0
        if a.eps1 > 0 and rng.random() < a.eps1:
            take_accept = not take_accept
        action = "accept" if take_accept else "reject"
        viol += action != node.dominant
        steps += 1
        node = node.accept if take_accept else node.reject
    return node, viol, steps


def run_marketplace(tree: MechanismTree, market: Marketplace, agents, trials: int,
                    seed: int, workers: int = 1) -> MarketplaceResult:
    """Execute the tree with LLM-rational agents.

    At each node the agent's perceived margin is shifted by +/- sigma_pi
    with equal probability, then the resulting action is flipped with
    probability eps1.
    """
    seed = check_seed(seed)
    agents = _agents_list(agents, market.n_agents)

    def block(arg):
        idx, size = arg
        rng = trial_rng(seed, idx)
        out = np.empty((size, 3))
        for t in range(size):
            leaf, viol, steps = walk_tree(tree, agents, rng)
            out[t] = (welfare_of(leaf.allocation, market), viol, steps)
        return out

    res = np.vstack(parallel_map(block, trial_blocks(trials), workers))
    viol, steps = int(res[:, 1].sum()), int(res[:, 2].sum())
    if steps == 0:
        rate = SimReport(0.0, 0.0, 0.0, trials, seed)
    else:
        rate = SimReport.from_counts(viol, steps, seed)
    return MarketplaceResult(SimReport.from_samples(res[:, 0], seed), rate,
                             dict(tree.greedy_leaf().allocation), viol, steps)

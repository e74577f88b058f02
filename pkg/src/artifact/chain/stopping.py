"""Entropy-threshold stopping on absorbing Markov reasoning chains.

The reasoner observes the chain state. Its belief over the final answer is
the absorption distribution from that state, so posterior entropy is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..core import TRIAL_BLOCK, SimReport, check_probability, check_seed, parallel_map, trial_blocks, trial_rng
from .bounds import entropy_threshold

ORACLE_MAX_STATES = 64
ORACLE_MAX_HORIZON = 200


@dataclass(frozen=True)
class ChainModel:
    """Finite absorbing Markov chain with labelled absorbing answer states."""

    kernel: np.ndarray
    correct_states: frozenset
    error_states: frozenset
    absorbing_states: frozenset
    start_state: int
    readout: dict
    answer_space: int
    true_answer: int = 0

    def __post_init__(self) -> None:
        P = np.asarray(self.kernel, dtype=float)
        object.__setattr__(self, "kernel", P)
        for name in ("correct_states", "error_states", "absorbing_states"):
            object.__setattr__(self, name, frozenset(int(s) for s in getattr(self, name)))
        object.__setattr__(self, "readout", {int(k): int(v) for k, v in self.readout.items()})
        n = P.shape[0]
        if P.ndim != 2 or P.shape != (n, n) or n < 1:
            raise ValueError("kernel must be a square matrix")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("kernel rows must be non-negative and sum to 1")
        states = set(range(n))
        if not (self.correct_states | self.error_states | self.absorbing_states) <= states:
            raise ValueError("state index out of range")
        transient = states - self.absorbing_states
        if self.correct_states & self.error_states:
            raise ValueError("correct and error states overlap")
        if (self.correct_states | self.error_states) != transient:
            raise ValueError("correct and error states must partition the non-absorbing states")
        for a in self.absorbing_states:
            if P[a, a] != 1.0:
                raise ValueError(f"absorbing state {a} must have an identity row")
        if set(self.readout) != set(self.absorbing_states):
            raise ValueError("readout must label exactly the absorbing states")
        if self.answer_space < 1 or any(not 0 <= v < self.answer_space for v in self.readout.values()):
            raise ValueError("readout labels must lie in [0, answer_space)")
        if not 0 <= self.true_answer < self.answer_space:
            raise ValueError("true_answer outside the answer space")
        if not 0 <= self.start_state < n:
            raise ValueError("start_state out of range")
        if self.start_state in self.error_states:
            raise ValueError("start_state must not be an error state")
        if not self._absorption_reachable():
            raise ValueError("no absorbing answer state is reachable from the start")

    @property
    def n_states(self) -> int:
        return self.kernel.shape[0]

    def _absorption_reachable(self) -> bool:
        seen = {self.start_state}
        stack = [self.start_state]
        while stack:
            s = stack.pop()
            if s in self.absorbing_states:
                return True
            for t in np.nonzero(self.kernel[s])[0]:
                if int(t) not in seen:
                    seen.add(int(t))
                    stack.append(int(t))
        return False

    def answer_distribution(self) -> np.ndarray:
        """Row s gives the distribution of the eventual answer from state s.

        Uses B = (I - Q)^{-1} R on the transient block. Transient states that
        never absorb get an all-zero row.
        """
        n = self.n_states
        absorbing = sorted(self.absorbing_states)
        transient = [s for s in range(n) if s not in self.absorbing_states]
        out = np.zeros((n, self.answer_space))
        for a in absorbing:
            out[a, self.readout[a]] = 1.0
        if transient:
            Q = self.kernel[np.ix_(transient, transient)]
            R = self.kernel[np.ix_(transient, absorbing)]
            labels = np.zeros((len(absorbing), self.answer_space))
            for j, a in enumerate(absorbing):
                labels[j, self.readout[a]] = 1.0
            # lstsq tolerates singular (I - Q) from closed transient classes.
            B = np.linalg.lstsq(np.eye(len(transient)) - Q, R @ labels, rcond=None)[0]
            out[transient] = np.clip(B, 0.0, 1.0)
        return out


def shannon_entropy(p: np.ndarray) -> np.ndarray:
    """Entropy in nats along the last axis, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def spectral_gap(model: ChainModel) -> float:
    """1 minus the spectral radius of the transient block."""
    transient = [s for s in range(model.n_states) if s not in model.absorbing_states]
    if not transient:
        return 1.0
    Q = model.kernel[np.ix_(transient, transient)]
    return float(1.0 - np.max(np.abs(np.linalg.eigvals(Q))))


@dataclass(frozen=True)
class StoppingConfig:
    lam: float
    gamma_hat: float
    ema_coeff: float = 0.3
    n_max: int = 100

    def __post_init__(self) -> None:
        check_probability(self.lam, "lambda")
        check_probability(self.gamma_hat, "gamma_hat")
        check_probability(self.ema_coeff, "ema_coeff")
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lambda must lie in (0, 1)")
        if not 0.0 < self.gamma_hat <= 1.0:
            raise ValueError("gamma_hat must lie in (0, 1]")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")

    @property
    def threshold(self) -> float:
        return entropy_threshold(self.lam, self.gamma_hat)


@dataclass
class StoppingResult:
    mean_loss: float
    loss_se: float
    mean_tau: float
    accuracy: SimReport
    trajectories: list = field(default_factory=list)

    def length_reduction(self, baseline: float) -> float:
        """Relative chain-length saving against a fixed-length baseline."""
        return 1.0 - self.mean_tau / baseline


def _run_block(model, cfg, B, H, argmax, cum, size, rng, dump):
    n = model.n_states
    h_star = cfg.threshold
    state = np.full(size, model.start_state, dtype=np.int64)
    tau = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    if model.start_state in model.absorbing_states:
        active[:] = False
    smooth = np.full(size, math.log(model.answer_space) if model.answer_space > 1 else 0.0)
    rows = []
    for t in range(1, cfg.n_max + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        u = rng.random(idx.size)
        cur = state[idx]
        nxt = (u[:, None] > cum[cur]).sum(axis=1)
        state[idx] = np.minimum(nxt, n - 1)
        smooth[idx] = cfg.ema_coeff * H[state[idx]] + (1 - cfg.ema_coeff) * smooth[idx]
        stop = smooth[idx] <= h_star
        if t == cfg.n_max:
            stop[:] = True
        tau[idx] = t
        if dump:
            for j, i in enumerate(idx):
                if i < dump:
                    rows.append((int(i), t, int(state[i]), float(H[state[i]]),
                                 float(smooth[i]), bool(stop[j])))
        active[idx[stop]] = False
    guess = argmax[state]
    loss = 1.0 - B[state, guess] + cfg.lam * tau
    correct = int(np.sum(guess == model.true_answer))
    return float(loss.sum()), float((loss**2).sum()), int(tau.sum()), correct, rows


def run_stopping(model: ChainModel, config: StoppingConfig, trials: int, seed: int,
                 workers: int = 1, dump_trials: int = 0) -> StoppingResult:
    """Simulate the smoothed-entropy stopping rule.

    Loss is the probability that the reported answer differs from the
    chain's eventual answer, given the stopping state, plus lambda per step.
    Accuracy compares the reported answer with ``model.true_answer``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if not 0 <= dump_trials <= TRIAL_BLOCK:
        raise ValueError(f"dump_trials must lie in [0, {TRIAL_BLOCK}]")
    seed = check_seed(seed)
    B = model.answer_distribution()
    H = shannon_entropy(B)
    argmax = B.argmax(axis=1)
    cum = np.cumsum(model.kernel, axis=1)
    cum[:, -1] = 1.0

    def run(block):
        idx, size = block
        dump = dump_trials if idx == 0 else 0
        return _run_block(model, config, B, H, argmax, cum, size, trial_rng(seed, idx), dump)

    parts = parallel_map(run, trial_blocks(trials), workers)
    s = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s / trials
    var = max(0.0, s2 / trials - mean * mean) * trials / max(1, trials - 1)
    rows = [r for p in parts for r in p[4]]
    return StoppingResult(
        mean_loss=mean,
        loss_se=math.sqrt(var / trials),
        mean_tau=sum(p[2] for p in parts) / trials,
        accuracy=SimReport.from_counts(sum(p[3] for p in parts), trials, seed),
        trajectories=rows,
    )


def _stop_cost(model: ChainModel) -> np.ndarray:
    return 1.0 - model.answer_distribution().max(axis=1)


def stopping_oracle(model: ChainModel, lam: float, horizon: int) -> float:
    """Bayes-optimal expected loss by backward induction (Snell envelope)."""
    lam = check_probability(lam, "lambda")
    if model.n_states > ORACLE_MAX_STATES:
        raise ValueError(f"oracle supports at most {ORACLE_MAX_STATES} states")
    if not 1 <= horizon <= ORACLE_MAX_HORIZON:
        raise ValueError(f"horizon must lie in [1, {ORACLE_MAX_HORIZON}]")
    c = _stop_cost(model)
    V = c.copy()
    for _ in range(horizon):
        V = np.minimum(c, lam + model.kernel @ V)
    return float(V[model.start_state])


def fixed_horizon_loss(model: ChainModel, lam: float, steps: int) -> float:
    """Exact expected loss of always stopping after ``steps`` steps."""
    c = _stop_cost(model)
    dist = np.zeros(model.n_states)
    dist[model.start_state] = 1.0
    for _ in range(steps):
        dist = dist @ model.kernel
    return float(dist @ c + lam * steps)


def planted_gap_chain(gamma: float = 0.3, n_undecided: int = 12, answers: int = 4,
                      commit_error: float = 0.1, seed: int = 0) -> ChainModel:
    """Chain whose transient block has spectral radius exactly 1 - gamma.

    Layout: ``answers`` absorbing states, one committed state per answer
    (stays with probability 1-gamma, else absorbs into its answer), and
    ``n_undecided`` states that wander among themselves with total mass
    1-gamma and commit with mass gamma. Answer 0 is correct.
    """
    gamma = check_probability(gamma, "gamma")
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    K, U = answers, n_undecided
    n = 2 * K + U
    P = np.zeros((n, n))
    absorbing = list(range(K))
    committed = list(range(K, 2 * K))
    undecided = list(range(2 * K, n))
    for a in absorbing:
        P[a, a] = 1.0
    for j, s in enumerate(committed):
        P[s, s] = 1.0 - gamma
        P[s, absorbing[j]] = gamma
    commit = np.array([1.0 - commit_error] + [commit_error / (K - 1)] * (K - 1))
    for s in undecided:
        w = rng.random(U)
        P[s, undecided] = (1.0 - gamma) * w / w.sum()
        P[s, committed] = gamma * commit
    # Row sums can drift by an ulp; put the residue on the self-loop.
    P[np.arange(n), np.arange(n)] += 1.0 - P.sum(axis=1)
    return ChainModel(
        kernel=P,
        correct_states=frozenset(undecided + [committed[0]]),
        error_states=frozenset(committed[1:]),
        absorbing_states=frozenset(absorbing),
        start_state=undecided[0],
        readout={a: a for a in absorbing},
        answer_space=K,
        true_answer=0,
    )


def absorbed_chain(label: int = 0, answer_space: int = 2, true_answer: int = 0) -> ChainModel:
    """Two-state chain already sitting in its absorbing answer state."""
    P = np.array([[1.0, 0.0], [1.0, 0.0]])
    return ChainModel(P, frozenset([1]), frozenset(), frozenset([0]), 0,
                      {0: label}, answer_space, true_answer)


def estimate_spectral_gap(trajectories) -> float:
    """Fit H_t = H0_i (1-gamma)^t + floor jointly across trajectories.

    For fixed gamma the model is linear in the per-trajectory amplitudes and
    the shared floor, so those are solved exactly and only gamma is searched.
    """
    trajs = [np.asarray(t, dtype=float) for t in trajectories]
    if not trajs:
        raise ValueError("need at least one trajectory")
    if any(t.size < 3 for t in trajs):
        raise ValueError("each trajectory needs at least 3 points")
    if all(np.ptp(t) == 0 for t in trajs):
        raise ValueError("constant trajectories do not identify the gap")
    m = len(trajs)
    y = np.concatenate(trajs)
    steps = np.concatenate([np.arange(t.size) for t in trajs])
    owner = np.concatenate([np.full(t.size, i) for i, t in enumerate(trajs)])

    def sse(g):
        X = np.zeros((y.size, m + 1))
        X[np.arange(y.size), owner] = (1.0 - g) ** steps
        X[:, m] = 1.0
        coef = np.linalg.lstsq(X, y, rcond=None)[0]
        r = X @ coef - y
        return float(r @ r)

    grid = np.linspace(1e-4, 1.0, 1000)
    vals = [sse(g) for g in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(0, i - 1)], grid[min(len(grid) - 1, i + 1)]
    res = optimize.minimize_scalar(sse, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    g = float(res.x) if res.fun <= vals[i] else float(grid[i])
    return min(1.0, max(g, 1e-12))

"""Shared numeric primitives, deterministic seeding and result records."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy import stats

T = TypeVar("T")

SEED_MAX = 2**64 - 1

# Trials are grouped into fixed-size blocks, each block drawing from its own
# derived seed. Block boundaries never depend on the worker count, which is
# what makes every simulator reproducible across thread counts.
TRIAL_BLOCK = 4096


def check_probability(value: float, name: str = "probability") -> float:
    """Return ``value`` as float, rejecting anything outside [0, 1]."""
    v = float(value)
    if not (0.0 <= v <= 1.0) or math.isnan(v):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return v


@dataclass(frozen=True)
class Probability:
    """A real number in [0, 1]; construction outside the range is rejected."""

    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", check_probability(self.value))

    def __float__(self) -> float:
        return self.value


def check_seed(seed: int) -> int:
    s = int(seed)
    if s < 0 or s > SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return s


class CostUnits(str, enum.Enum):
    PROBABILITY = "probability"
    SAMPLE_COUNT = "sample-count"
    WELFARE_FRACTION = "welfare-fraction"
    PERCENTAGE_POINTS = "percentage-points"
    MULTIPLIER = "multiplier"


class Rule(str, enum.Enum):
    """Prescribed design actions, one per catalogue row."""

    DELEGATE_OUTSIDE_ARCHITECTURE = "delegate-outside-architecture"
    DELEGATE_AT_HORIZON = "delegate-at-horizon"
    ENTROPY_STOPPING_AND_VERIFICATION = "entropy-stopping-and-verification"
    INVEST_IN_PROCESS_SUPERVISION = "invest-in-process-supervision"
    CAP_RANK_SCALE_DATA = "cap-rank-scale-data"
    MEASURE_MISSPECIFICATION = "measure-misspecification"
    RETAIN_REAL_DATA = "retain-real-data"
    RETRAIN_BEYOND_EDIT_CAPACITY = "retrain-beyond-edit-capacity"
    INDEPENDENT_METRICS = "independent-metrics"
    CLASSIFY_BEFORE_ROUTING = "classify-before-routing"
    STEP_LEVEL_RETRIEVAL = "step-level-retrieval"
    INTERVENTIONAL_ATTRIBUTION = "interventional-attribution"
    CERTIFIED_AGGREGATION = "certified-aggregation"
    OSP_MECHANISM = "osp-mechanism"
    REDUCE_NONLINEARITY_COUNT = "reduce-nonlinearity-count"
    DEPLOY_JOINTLY = "deploy-jointly"


RULE_BY_SPEC: dict[int, Rule] = {i + 1: r for i, r in enumerate(Rule)}


@dataclass(frozen=True)
class SpecVerdict:
    """Uniform outcome of evaluating one catalogue row."""

    spec_id: int
    boundary_value: float
    satisfied: bool
    violation_cost: float
    cost_units: CostUnits
    rule: Rule
    vacuous: bool = False

    def __post_init__(self) -> None:
        if not 1 <= self.spec_id <= 16:
            raise ValueError(f"spec_id must be in 1..16, got {self.spec_id}")
        if not self.violation_cost >= 0:
            raise ValueError("violation_cost must be non-negative")
        if RULE_BY_SPEC[self.spec_id] is not self.rule:
            raise ValueError(f"rule {self.rule} does not belong to row {self.spec_id}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cost_units"] = self.cost_units.value
        d["rule"] = self.rule.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpecVerdict":
        d = dict(d)
        d["cost_units"] = CostUnits(d["cost_units"])
        d["rule"] = Rule(d["rule"])
        return cls(**d)


@dataclass(frozen=True)
class SimReport:
    """Seeded Monte Carlo estimate with its interval."""

    estimate: float
    ci_low: float
    ci_high: float
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not (self.ci_low <= self.estimate <= self.ci_high):
            raise ValueError(
                f"interval [{self.ci_low}, {self.ci_high}] does not contain {self.estimate}"
            )
        check_seed(self.master_seed)

    @classmethod
    def from_counts(cls, successes: int, trials: int, master_seed: int,
                    confidence: float = 0.95) -> "SimReport":
        lo, hi = wilson_interval(successes, trials, confidence)
        return cls(successes / trials, lo, hi, trials, master_seed)

    @classmethod
    def from_samples(cls, values: np.ndarray, master_seed: int,
                     confidence: float = 0.95) -> "SimReport":
        """Mean with a normal-approximation interval, for non-proportion data."""
        values = np.asarray(values, dtype=float)
        n = values.size
        mean = float(values.mean())
        if n > 1:
            se = float(values.std(ddof=1)) / math.sqrt(n)
        else:
            se = 0.0
        z = stats.norm.ppf(0.5 + confidence / 2)
        return cls(mean, mean - z * se, mean + z * se, n, master_seed)

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low

    def to_dict(self) -> dict:
        return asdict(self)


def binom_tail(trials: int, min_successes: int, p: float) -> float:
    """P[X >= min_successes] for X ~ Binomial(trials, p).

    ``min_successes == trials + 1`` is the empty tail and returns 0.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    p = check_probability(p, "p")
    if min_successes < 0:
        raise ValueError("min_successes must be non-negative")
    if min_successes > trials + 1:
        raise ValueError(f"min_successes={min_successes} exceeds trials={trials}")
    if min_successes == 0:
        return 1.0
    if min_successes == trials + 1:
        return 0.0
    # scipy's survival function is evaluated through the regularised beta
    # function, so it stays accurate deep in the tail.
    return float(stats.binom.sf(min_successes - 1, trials, p))


def wilson_interval(successes: int, trials: int,
                    confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if successes < 0 or successes > trials:
        raise ValueError(f"successes={successes} outside [0, {trials}]")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    z = stats.norm.ppf(0.5 + confidence / 2)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = max(0.0, min(centre - half, phat))
    hi = min(1.0, max(centre + half, phat))
    return lo, hi


def derive_trial_seed(master: int, trial_index: int) -> int:
    """Mix (master, index) into a fresh 64-bit seed.

    Uses numpy's SeedSequence hashing with the index as spawn key, so the
    result depends only on the pair and never on evaluation order.
    """
    master = check_seed(master)
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    ss = np.random.SeedSequence(entropy=master, spawn_key=(int(trial_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_trial_seed(master, index))


def trial_blocks(trials: int, block: int = TRIAL_BLOCK) -> list[tuple[int, int]]:
    """Split ``trials`` into (block_index, size) pairs of fixed size."""
    if trials < 1:
        raise ValueError("trials must be positive")
    out = []
    start = 0
    idx = 0
    while start < trials:
        size = min(block, trials - start)
        out.append((idx, size))
        start += size
        idx += 1
    return out


def parallel_map(fn: Callable[[T], object], items: Sequence[T], workers: int = 1) -> list:
    """Map ``fn`` over ``items`` on a thread pool, preserving input order."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def fmt12(x: float) -> str:
    """Serialise a number with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def round12(obj):
    """Recursively round floats in a JSON-like structure to 12 significant digits."""
    if isinstance(obj, dict):
        return {k: round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return float(f"{f:.12g}")
        return f
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def clamp01(x: float) -> tuple[float, bool]:
    """Clip a bound to [0, 1]; the flag reports whether clipping happened."""
    if x > 1.0:
        return 1.0, True
    if x < 0.0:
        return 0.0, True
    return float(x), False

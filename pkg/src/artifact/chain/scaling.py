"""Supervision separation, test-time scaling laws and compute allocation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..core import check_probability


def supervision_ratio(n: float, eta: float = 0.0) -> float:
    """Outcome-to-process sample-complexity ratio n/ln n, scaled by (1-2 eta)^2 under label noise."""
    if n < 2:
        raise ValueError("n must be >= 2")
    eta = check_probability(eta, "eta")
    if eta >= 0.5:
        raise ValueError("label noise must be < 0.5")
    return n / math.log(n) * (1.0 - 2.0 * eta) ** 2


def training_fraction_ratio(n: float) -> float:
    """Process-vs-outcome training-fraction ratio n/(ln n)^2."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return n / math.log(n) ** 2


@dataclass(frozen=True)
class BestOfNPerfect:
    pass


@dataclass(frozen=True)
class BestOfNImperfect:
    eps_v: float

    def __post_init__(self):
        if not 0.0 <= self.eps_v < 1.0:
            raise ValueError("eps_v must lie in [0, 1)")


@dataclass(frozen=True)
class Beam:
    width: int

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("beam width must be >= 2")


@dataclass(frozen=True)
class SingleChainVerified:
    eps: float
    i_step: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eps < 1.0:
            raise ValueError("eps must lie in [0, 1)")
        if self.i_step <= 0:
            raise ValueError("i_step must be positive")


StrategySpec = BestOfNPerfect | BestOfNImperfect | Beam | SingleChainVerified


def strategy_from_dict(d: dict) -> StrategySpec:
    """Build a strategy from ``{"kind": ..., **params}``."""
    d = dict(d)
    kind = d.pop("kind")
    classes = {
        "BestOfNPerfect": BestOfNPerfect,
        "BestOfNImperfect": BestOfNImperfect,
        "Beam": Beam,
        "SingleChainVerified": SingleChainVerified,
    }
    if kind not in classes:
        raise ValueError(f"unknown strategy kind {kind!r}")
    return classes[kind](**d)


def effective_branching(strategy: StrategySpec) -> float:
    if isinstance(strategy, BestOfNPerfect):
        return math.inf
    if isinstance(strategy, BestOfNImperfect):
        return math.inf if strategy.eps_v == 0 else 1.0 / (1.0 - strategy.eps_v)
    if isinstance(strategy, Beam):
        return float(strategy.width - 1)
    if isinstance(strategy, SingleChainVerified):
        return strategy.i_step / (strategy.i_step + strategy.eps)
    raise TypeError(f"unknown strategy {strategy!r}")


def scaling_exponent(strategy: StrategySpec) -> float:
    """Scaling exponent alpha of the success curve for an inference strategy.

    Beam(2) has a single surviving branch, where the generic logarithmic
    form degenerates; it returns 0 and emits a warning.
    """
    if isinstance(strategy, BestOfNPerfect):
        return 1.0
    if isinstance(strategy, BestOfNImperfect):
        return 1.0 - strategy.eps_v
    if isinstance(strategy, Beam):
        b = strategy.width
        if b == 2:
            warnings.warn("Beam(2) has effective branching 1; exponent reported as 0",
                          stacklevel=2)
            return 0.0
        return math.log(b - 1) / math.log(b)
    if isinstance(strategy, SingleChainVerified):
        return 1.0 / (1.0 + strategy.eps / strategy.i_step)
    raise TypeError(f"unknown strategy {strategy!r}")


def success_curve(C: float, c: float, alpha: float) -> float:
    """Success probability 1 - exp(-c C^alpha)."""
    if C < 0 or c <= 0:
        raise ValueError("C must be >= 0 and c > 0")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return float(-math.expm1(-c * C**alpha))


@dataclass(frozen=True)
class ScalingFit:
    c: float
    alpha: float
    r_squared: float


def fit_scaling(points) -> ScalingFit:
    """Nonlinear least-squares fit of success = 1 - exp(-c C^alpha).

    A coarse (c, alpha) grid picks the starting point, then a bounded
    trust-region refinement polishes it. Fully deterministic.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValueError("need at least 4 (C, success) points")
    C, y = pts[:, 0], pts[:, 1]
    if np.unique(C).size < 4:
        raise ValueError("need at least 4 distinct compute values")
    if np.any(C <= 0) or np.any((y < 0) | (y > 1)):
        raise ValueError("C must be positive and success rates in [0, 1]")
    if np.ptp(y) == 0:
        raise ValueError("constant success rates cannot identify the curve")

    logC = np.log(C)

    def model(c, a):
        return -np.expm1(-c * np.exp(a * logC))

    alphas = np.linspace(0.05, 1.5, 59)
    cs = np.logspace(-4, 1, 61)
    best = (math.inf, 1.0, 0.5)
    for a in alphas:
        for c in cs:
            sse = float(np.sum((model(c, a) - y) ** 2))
            if sse < best[0]:
                best = (sse, c, a)
    _, c0, a0 = best

    # Optimise over log c so the positivity constraint is implicit.
    res = optimize.least_squares(
        lambda th: model(math.exp(th[0]), th[1]) - y,
        x0=[math.log(c0), a0],
        bounds=([-30.0, 1e-6], [10.0, 5.0]),
        xtol=1e-14, ftol=1e-14, gtol=1e-14,
    )
    c_hat, a_hat = math.exp(res.x[0]), float(res.x[1])
    resid = model(c_hat, a_hat) - y
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return ScalingFit(c_hat, a_hat, r2)


class InfeasibleBudget(ValueError):
    pass


@dataclass(frozen=True)
class Allocation:
    T_star: float
    C_star: float
    eps_v: float

    @property
    def ratio(self) -> float:
        return self.T_star / self.C_star


def allocation_optimum(budget: float, c_train: float, c_infer: float, n: int,
                       d_cot: float, c: float, eps_const: float = 1.0) -> Allocation:
    """Stationary split of a compute budget between training T and inference C.

    Solves T/C = (c_infer/c_train) d_cot n ln C / (C^(1-eps_v) c), where
    eps_v(T) = eps_const d_cot n ln T / T and c_train T + c_infer C = budget.
    The root is bracketed on a log grid and refined by Brent's method.
    """
    for name, v in (("budget", budget), ("c_train", c_train), ("c_infer", c_infer),
                    ("d_cot", d_cot), ("c", c), ("eps_const", eps_const)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    if n < 1:
        raise ValueError("n must be positive")
    k = eps_const * d_cot * n

    def eps_v(T):
        return k * math.log(T) / T

    def inference(T):
        return (budget - c_train * T) / c_infer

    def resid(T):
        C = inference(T)
        rhs = (c_infer / c_train) * d_cot * n * math.log(C) / (C ** (1.0 - eps_v(T)) * c)
        return math.log(T / C) - math.log(rhs)

    T_hi = (budget - c_infer * math.e) / c_train  # keep C > e so ln C > 1
    # eps_v(T) < 1 needs T / ln T > k; the map is increasing for T > e.
    T_lo = max(math.e, k)
    while T_lo < T_hi and eps_v(T_lo) >= 1.0:
        T_lo *= 1.01
    if not T_lo < T_hi:
        raise InfeasibleBudget("budget too small for a verifier error below 1")

    grid = np.geomspace(T_lo, T_hi * (1 - 1e-12), 400)
    vals = [resid(t) for t in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            T = float(grid[i])
            break
        if vals[i] * vals[i + 1] < 0:
            T = optimize.brentq(resid, grid[i], grid[i + 1], xtol=1e-12, rtol=1e-14)
            break
    else:
        raise InfeasibleBudget("no interior stationary allocation for this budget")
    C = (budget - c_train * T) / c_infer
    return Allocation(float(T), float(C), float(eps_v(T)))

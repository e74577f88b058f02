"""Proof-length costs of verifying neural activations and folding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from ..core import check_probability


@dataclass(frozen=True)
class TaxConfig:
    log_p: float = 128.0
    overhead_mle: float = 0.05
    overhead_lookup: float = 0.085
    overhead_fs: float = 0.03
    relu_fraction: float = 0.9
    # ReLU lookup tables are cheaper than the averaged lookup overhead; the
    # softmax class carries the full averaged figure.
    relu_lookup_discount: float = 0.30

    def __post_init__(self) -> None:
        if not self.log_p > 0:
            raise ValueError("log_p must be positive")
        for name in ("overhead_mle", "overhead_lookup", "overhead_fs"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        check_probability(self.relu_fraction, "relu_fraction")
        check_probability(self.relu_lookup_discount, "relu_lookup_discount")


@dataclass(frozen=True)
class TaxResult:
    floor: float
    stacked: float
    headline: float
    relu_stacked: float
    softmax_stacked: float


def nonlinearity_tax(cfg: TaxConfig = TaxConfig()) -> TaxResult:
    """Floor log p, fully stacked overhead, and the activation-mix headline."""
    def stack(lookup):
        return cfg.log_p * (1 + cfg.overhead_mle) * (1 + lookup) * (1 + cfg.overhead_fs)

    stacked = stack(cfg.overhead_lookup)
    relu = stack(cfg.overhead_lookup * (1 - cfg.relu_lookup_discount))
    soft = stacked
    headline = cfg.relu_fraction * relu + (1 - cfg.relu_fraction) * soft
    return TaxResult(cfg.log_p, stacked, headline, relu, soft)


class Activation(str, enum.Enum):
    RELU = "ReLU"
    SOFTMAX = "Softmax"
    GELU = "GELU"


class Conditionality(str, enum.Enum):
    UNCONDITIONAL = "Unconditional"
    CONDITIONAL = "ConditionalOnConjecture"


@dataclass(frozen=True)
class IopFloor:
    proof_length_floor: float
    conditionality: Conditionality


def iop_floor(n_ops: int, log_p: float, activation: Activation, conditional: bool = False) -> IopFloor:
    """Proof-length lower bound for n activations, tagged by what it rests on."""
    if n_ops < 1:
        raise ValueError("n_ops must be positive")
    if not log_p > 1:
        raise ValueError("log_p must exceed 1")
    act = Activation(activation)
    if act is Activation.RELU:
        return IopFloor(n_ops * log_p, Conditionality.UNCONDITIONAL)
    if act is Activation.SOFTMAX:
        if conditional:
            return IopFloor(n_ops * log_p**2, Conditionality.CONDITIONAL)
        return IopFloor(n_ops * log_p, Conditionality.UNCONDITIONAL)
    return IopFloor(n_ops * log_p * math.log(log_p), Conditionality.CONDITIONAL)


# Recursive-circuit gate counts per reference architecture, keyed by width.
FOLDING_TABLE = {
    768: {"model": "BERT-base", "nova": 589_824, "hypernova": 127_345, "collapse": 55_296},
    1024: {"model": "GPT-2", "nova": 1_048_576, "hypernova": 188_416, "collapse": 71_680},
    4096: {"model": "LLaMA-7B", "nova": 16_777_216, "hypernova": 921_600, "collapse": 294_912},
    5120: {"model": "LLaMA-13B", "nova": 26_214_400, "hypernova": 1_310_720, "collapse": 409_600},
}
# Verifier-op figure quoted for BERT-base next to its recomputed value.
BERT_VERIFIER_REFERENCE = 108


@dataclass(frozen=True)
class FoldingCosts:
    verifier_ops: float
    recursive_gates: float
    reference: dict | None


def folding_costs(d_layers: int, n_max: int, c_verifier: float = 1.0,
                  c_circuit: float = 1.0) -> FoldingCosts:
    """Verifier cost c_v d log2 n_max and recursive circuit c_c log2(n_max)^2."""
    if d_layers < 1 or n_max < 2:
        raise ValueError("need d_layers >= 1 and n_max >= 2")
    if not c_verifier > 0 or not c_circuit > 0:
        raise ValueError("constants must be positive")
    lg = math.log2(n_max)
    return FoldingCosts(c_verifier * d_layers * lg, c_circuit * lg * lg, FOLDING_TABLE.get(n_max))

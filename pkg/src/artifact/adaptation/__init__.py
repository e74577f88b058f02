"""Adaptation calculators: adapters, preferences, collapse and editing."""

from .collapse import (
    CollapseConfig,
    CollapseMode,
    accumulation_ceiling,
    collapse_lower_bound,
    gaussian_kl_full,
    quadratic_fit_r2,
    sequence_collapse_bound,
    simulate_collapse,
)
from .editing import EditCapacity, EditConfig, CoverageGap, edit_capacity, edit_interference, evopref_gap
from .lora import LoraBound, LoraConfig, lora_bound, lora_effective_params, lora_kl, rank_ceiling
from .preference import (
    DpoAdvice,
    Noise,
    PrefProblem,
    PrefRegime,
    PreferenceResult,
    dpo_rlhf_advice,
    pref_regime,
    simulate_preference,
)

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.horizon import (
    HORIZON_TABLE_REFERENCE,
    PLANNING_REFERENCE_STEPS,
    ArchProfile,
    Regime,
    Supervision,
    TaskProfile,
    clc_ratio,
    compositional_ceiling,
    decay_bound,
    design_plan,
    finetune_envelope,
    horizon_predict,
    planning_capacity,
    regime_classify,
    schematic_decay,
)


def test_horizon_reference_values():
    assert horizon_predict(ArchProfile(32, 4096)) == pytest.approx(27.4, abs=0.05)
    assert horizon_predict(ArchProfile(24, 1024)) == pytest.approx(
        2.74 * math.log(24) * math.sqrt(math.log(1024)), rel=1e-15)
    assert horizon_predict(ArchProfile(24, 1024)) == pytest.approx(22.9, abs=0.05)
    assert horizon_predict(ArchProfile(12, 768, 0.0)) == 0.0


def test_table_rows_that_do_not_recompute_are_kept_as_reference():
    small = HORIZON_TABLE_REFERENCE["gpt2-small"]
    recomputed = horizon_predict(ArchProfile(small["L"], small["d"]))
    assert recomputed == pytest.approx(17.55, abs=0.01)
    assert small["table"] == 19.5


@given(st.integers(1, 200), st.integers(3, 20000))
def test_horizon_monotone(L, d):
    base = horizon_predict(ArchProfile(L, d))
    assert horizon_predict(ArchProfile(L + 1, d)) > base or L == 1 and base == 0
    assert horizon_predict(ArchProfile(L, d + 1)) >= base


def test_horizon_not_symmetric():
    assert horizon_predict(ArchProfile(32, 4096)) != horizon_predict(ArchProfile(4096, 32))


def test_decay_bound_values():
    assert decay_bound(20, 27.4, 32, 4096) == 1.0
    expected = math.exp(-(54.8 - 27.4) ** 2 / (1024 * math.log(4096)))
    assert decay_bound(54.8, 27.4, 32, 4096) == pytest.approx(expected, rel=1e-12)
    assert decay_bound(54.8, 27.4, 32, 4096) == pytest.approx(0.916, abs=1e-3)
    assert schematic_decay(27.4, 27.4) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0, 500), st.floats(0, 500))
def test_decay_bound_non_increasing(a, b):
    lo, hi = sorted((a, b))
    assert decay_bound(hi, 27.4, 32, 4096) <= decay_bound(lo, 27.4, 32, 4096)


def test_regime_classify_examples():
    assert regime_classify(12, 27.4) is Regime.CHAIN_OF_THOUGHT
    assert regime_classify(27.4, 27.4) is Regime.CHAIN_OF_THOUGHT
    assert regime_classify(54.8, 27.4) is Regime.KREDUNDANT_VERIFICATION
    assert regime_classify(60, 27.4) is Regime.TOOL_DELEGATION


@given(st.floats(0, 1e4), st.floats(0.01, 1e3), st.floats(0.01, 100))
def test_regime_scale_invariant(delta, d_star, scale):
    a = regime_classify(delta, d_star)
    b = regime_classify(delta * scale, d_star * scale)
    # Scaling can move points within 1 ulp of a boundary; skip those.
    near = min(abs(delta - d_star), abs(delta - 2 * d_star)) < 1e-9 * max(1.0, delta)
    assert a is b or near


def test_clc_ratio():
    r = clc_ratio(TaskProfile(10, 0.05, m_req=12, n_req=3, n_train=1), 27.4)
    assert r.ratio == pytest.approx(1.39, abs=0.005) and r.fails
    assert clc_ratio(TaskProfile(10, 0.05, m_req=5, n_req=2, n_train=1), 27.4).ratio == \
        pytest.approx(10 / 27.4, rel=1e-12)
    assert clc_ratio(TaskProfile(10, 0.05, m_req=5, n_req=4, n_train=4), 27.4).ratio == 0
    with pytest.raises(ValueError):
        TaskProfile(10, 0.05, n_train=0)


@given(st.integers(1, 50), st.integers(1, 50))
def test_clc_flag_consistent_and_monotone(m1, m2):
    lo, hi = sorted((m1, m2))
    a = clc_ratio(TaskProfile(5, 0.05, m_req=lo, n_req=8, n_train=1), 27.4)
    b = clc_ratio(TaskProfile(5, 0.05, m_req=hi, n_req=8, n_train=1), 27.4)
    assert a.fails == (a.ratio >= 1)
    assert b.fails >= a.fails


def test_planning_capacity():
    arch = ArchProfile(32, 4096)
    pc = planning_capacity(arch, 73, 12)
    assert pc.upper == pytest.approx(32 * 32 * math.log(4096) / math.log(73 * 12), rel=1e-12)
    assert pc.upper == pytest.approx(1257, abs=1)
    assert pc.reference_steps == PLANNING_REFERENCE_STEPS == 89
    assert planning_capacity(ArchProfile(64, 4096), 73, 12).upper == pytest.approx(4 * pc.upper)
    with pytest.raises(ValueError):
        planning_capacity(arch, 1, 12)


def test_compositional_ceiling():
    assert compositional_ceiling(2) == 1.0
    assert compositional_ceiling(10) == pytest.approx(0.8)
    assert compositional_ceiling(10**9) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        compositional_ceiling(1)


def test_finetune_envelope():
    assert finetune_envelope(27.4, 40, 1.0) == pytest.approx(0.685, abs=0.005)
    assert finetune_envelope(27.4, 80, 1.0) == pytest.approx(0.3425, abs=0.005)
    assert finetune_envelope(27.4, 1e12, 1.0) < 1e-9
    with pytest.raises(ValueError):
        finetune_envelope(27.4, 27.4, 1.0)


@given(st.floats(28, 1e4), st.floats(28, 1e4))
def test_finetune_envelope_hyperbolic(a, b):
    lo, hi = sorted((a, b))
    assert finetune_envelope(27.4, hi, 0.9) <= finetune_envelope(27.4, lo, 0.9)
    assert finetune_envelope(27.4, hi, 0.9) * hi <= finetune_envelope(27.4, lo, 0.9) * lo + 1e-9


def test_design_plan_worked_example():
    plan = design_plan(ArchProfile(32, 4096), TaskProfile(15, 0.05, target_error=0.05),
                       0.025, 0.3, non_redundant=True)
    assert plan.d_star == pytest.approx(27.4, abs=0.05)
    assert plan.regime is Regime.CHAIN_OF_THOUGHT
    assert plan.k_star == 3
    assert plan.supervision is Supervision.PROCESS
    assert plan.supervision_gain == pytest.approx(15 / math.log(15), rel=1e-12)
    assert plan.supervision_gain == pytest.approx(5.5, abs=0.1)
    assert not plan.advisory


def test_design_plan_tool_delegation_is_advisory():
    plan = design_plan(ArchProfile(32, 4096), TaskProfile(100, 0.05), 0.025, 0.3, False)
    assert plan.regime is Regime.TOOL_DELEGATION and plan.advisory
    assert plan.supervision is Supervision.OUTCOME
    d = plan.to_dict()
    assert all(isinstance(d[k], (int, float)) and d[k] >= 0
               for k in ("d_star", "k_star", "n_star", "h_star"))

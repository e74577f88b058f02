import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.core import (
    CostUnits,
    Probability,
    Rule,
    SimReport,
    SpecVerdict,
    binom_tail,
    derive_trial_seed,
    parallel_map,
    trial_blocks,
    wilson_interval,
)


def enumerate_tail(n, m, p):
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        k = sum(bits)
        if k >= m:
            total += p**k * (1 - p) ** (n - k)
    return total


def test_binom_tail_direct_sum():
    assert binom_tail(3, 2, 0.05) == pytest.approx(3 * 0.0025 * 0.95 + 0.000125, abs=1e-15)


def test_binom_tail_edges():
    assert binom_tail(7, 0, 0.3) == 1.0
    assert binom_tail(7, 8, 0.3) == 0.0
    with pytest.raises(ValueError):
        binom_tail(7, 9, 0.3)
    with pytest.raises(ValueError):
        binom_tail(7, 2, 1.2)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.data(), st.floats(0, 1))
def test_binom_tail_matches_enumeration(n, data, p):
    m = data.draw(st.integers(0, n))
    assert abs(binom_tail(n, m, p) - enumerate_tail(n, m, p)) < 1e-12


@given(st.integers(1, 40), st.floats(0, 1), st.floats(0, 1))
def test_binom_tail_monotone(n, p1, p2):
    lo, hi = sorted((p1, p2))
    vals = [binom_tail(n, m, lo) for m in range(n + 2)]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    for m in range(n + 1):
        assert binom_tail(n, m, lo) <= binom_tail(n, m, hi) + 1e-12


def test_wilson_reference_intervals():
    # The quoted endpoints were computed from proportions rounded to 0.1%,
    # so integer counts land within 2e-3 of them rather than exactly.
    lo, hi = wilson_interval(262, 300)
    assert lo == pytest.approx(0.832, abs=2e-3) and hi == pytest.approx(0.907, abs=2e-3)
    lo, hi = wilson_interval(147, 400)
    assert lo == pytest.approx(0.322, abs=2e-3) and hi == pytest.approx(0.417, abs=2e-3)
    assert wilson_interval(0, 50)[0] == 0.0
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


@given(st.integers(1, 10_000), st.data(), st.floats(0.5, 0.999))
def test_wilson_contains_phat(n, data, conf):
    k = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(k, n, conf)
    assert 0 <= lo <= k / n <= hi <= 1


def test_seed_derivation_determinism_and_uniqueness():
    s = 12345
    assert derive_trial_seed(s, 0) != derive_trial_seed(s, 1)
    assert derive_trial_seed(s, 7) == derive_trial_seed(s, 7)
    seeds = {derive_trial_seed(s, i) for i in range(10_000)}
    assert len(seeds) == 10_000
    with pytest.raises(ValueError):
        derive_trial_seed(-1, 0)


def test_probability_and_verdict_validation():
    assert float(Probability(0.3)) == 0.3
    with pytest.raises(ValueError):
        Probability(1.5)
    v = SpecVerdict(3, 0.2, True, 0.1, CostUnits.PROBABILITY, Rule.ENTROPY_STOPPING_AND_VERIFICATION)
    assert v.to_dict()["rule"] == "entropy-stopping-and-verification"
    with pytest.raises(ValueError):
        SpecVerdict(17, 0, True, 0, CostUnits.PROBABILITY, Rule.DEPLOY_JOINTLY)
    with pytest.raises(ValueError):
        SpecVerdict(3, 0, True, -1, CostUnits.PROBABILITY, Rule.ENTROPY_STOPPING_AND_VERIFICATION)
    with pytest.raises(ValueError):
        SpecVerdict(3, 0, True, 0, CostUnits.PROBABILITY, Rule.DEPLOY_JOINTLY)


def test_simreport_invariants():
    r = SimReport.from_counts(30, 100, 1)
    assert r.ci_low <= r.estimate <= r.ci_high
    with pytest.raises(ValueError):
        SimReport(0.5, 0.6, 0.7, 10, 1)
    s = SimReport.from_samples(np.array([1.0, 2.0, 3.0]), 0)
    assert s.estimate == 2.0 and s.width > 0


def test_trial_blocks_and_parallel_map():
    assert trial_blocks(10_000) == [(0, 4096), (1, 4096), (2, 1808)]
    assert parallel_map(math.sqrt, [1, 4, 9], workers=3) == [1, 2, 3]

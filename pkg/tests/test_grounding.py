import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.grounding import (
    BanditEnv,
    ConflictInstance,
    NoCandidate,
    Route,
    ToyKG,
    attribution_floor,
    cas_score,
    certified_radius,
    certify,
    exact_vote_shares,
    kg_vote,
    metric_requirements,
    radius_oracle,
    regret_bound,
    route_conflict,
    routing_cost,
    run_bandit_retrieval,
    run_bandit_seeds,
)
from artifact.scenarios import data_path

FIXTURES = ["direct_2paths", "direct_3paths", "direct_4paths", "direct_5paths",
            "decoy_2paths", "decoy_3paths", "decoy_2paths_z"]


def load(name):
    return ToyKG.load(data_path(f"kg/{name}.tsv"))


# ----------------------------------------------------------- metrics

def test_metric_requirements():
    r = metric_requirements(5)
    assert (r.min_metrics, r.ambiguity_dim) == (5, 4)
    assert metric_requirements(1).ambiguity_dim == 0
    assert metric_requirements(3, 0.1).ambiguity_count_order == pytest.approx(100)


def test_route_conflict():
    assert route_conflict(ConflictInstance(1.0, 1.0)) is Route.SHALLOW
    assert route_conflict(ConflictInstance(0.0, 1.0)) is Route.DEEP
    assert route_conflict(ConflictInstance(0.5, 1.0)) is Route.SHALLOW
    assert route_conflict(ConflictInstance(0.9, 1.5)) is Route.SHALLOW
    with pytest.raises(ValueError):
        ConflictInstance(2.0, 1.0)


@given(st.floats(0, 10), st.floats(0.01, 10), st.floats(1e-3, 1e3))
def test_route_scale_invariant(i, h, s):
    i = min(i, h)
    assert route_conflict(ConflictInstance(i, h)) is route_conflict(ConflictInstance(i * s, h * s))


def test_routing_cost():
    assert routing_cost(Route.SHALLOW, Route.DEEP).accuracy_penalty_pp == 9.2
    assert routing_cost(Route.DEEP, Route.SHALLOW).compute_waste_fraction == 0.94
    c = routing_cost("Shallow", "Shallow")
    assert (c.accuracy_penalty_pp, c.compute_waste_fraction) == (0, 0)


def test_cas_score():
    assert cas_score(0.5, 0.5).cas == 0 and not cas_score(0.5, 0.5).edge_retained
    r = cas_score(0.9, 0.2)
    assert r.cas == pytest.approx(0.7) and r.edge_retained
    assert not cas_score(0.5, 0.4).edge_retained


def test_attribution_floor_values():
    assert attribution_floor(2, 0.10) == pytest.approx(0.19)
    assert attribution_floor(5, 0.10) == pytest.approx(0.41, abs=0.005)
    assert attribution_floor(10, 0.10) == pytest.approx(0.65, abs=0.005)


@given(st.integers(1, 50), st.floats(0, 0.49))
def test_attribution_floor_sandwich(k, eps):
    f = attribution_floor(k, eps)
    assert f <= k * eps + 1e-12
    if k * eps <= 1:
        assert f >= k * eps * (1 - k * eps) - 1e-12


# ------------------------------------------------------------ bandit

def test_regret_bound():
    assert regret_bound(1000, 4, 0.05) == pytest.approx(8 * math.sqrt(1000 * math.log(20000)))
    assert regret_bound(1000, 4, 0.05) == pytest.approx(800, rel=0.01)
    assert regret_bound(0, 4, 0.05) == 0
    ratio = regret_bound(4000, 4, 0.05) / regret_bound(1000, 4, 0.05)
    assert 2 <= ratio <= 2.2


def test_bandit_zero_theta_has_zero_regret():
    run = run_bandit_retrieval(BanditEnv(theta=(0, 0, 0, 0)), 0.05, seed=1)
    assert run.final_regret == 0


def test_bandit_validation():
    with pytest.raises(ValueError):
        BanditEnv(noise_sigma=0.6)
    with pytest.raises(ValueError):
        BanditEnv(theta=(1, 1, 0, 0))


def test_bandit_trace_and_determinism():
    env = BanditEnv(horizon=200)
    a = run_bandit_retrieval(env, 0.05, seed=3, keep_trace=True)
    b = run_bandit_retrieval(env, 0.05, seed=3)
    assert np.array_equal(a.cumulative_regret, b.cumulative_regret)
    assert len(a.trace) == 200 and a.trace[-1][3] == a.final_regret
    assert np.all(np.diff(a.cumulative_regret) >= 0)


def test_bandit_regret_envelope_and_sublinearity():
    seeds = range(30)
    means = {}
    for T in (250, 1000, 4000):
        r = run_bandit_seeds(BanditEnv(horizon=T), 0.05, seeds, workers=4)
        assert np.all(r >= 0)
        assert r.max() <= regret_bound(T, 4, 0.05)
        means[T] = r.mean()
        assert means[T] / math.sqrt(T * math.log(T)) < 1.0
    assert means[4000] / means[1000] < 2.5


# ---------------------------------------------------------------- kg

def test_certified_radius_values():
    assert certified_radius(0.92, 0.7) == 1
    assert certified_radius(0.5, 0.7) == 0
    assert certified_radius(0.71, 0.7) == 0


@given(st.floats(0.501, 0.9999), st.floats(0.501, 0.9999), st.floats(0.01, 0.99))
def test_certified_radius_monotone(a, b, p):
    lo, hi = sorted((a, b))
    assert certified_radius(lo, p) <= certified_radius(hi, p)


@given(st.floats(0.501, 0.9999), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_certified_radius_nonincreasing_in_retention(pa, p1, p2):
    lo, hi = sorted((p1, p2))
    assert certified_radius(pa, hi) <= certified_radius(pa, lo)


def test_kg_load_and_validation():
    kg = load("decoy_2paths")
    assert ("h", "r", "A") in kg.triples
    with pytest.raises(ValueError):
        ToyKG(("a", "b"), (("a", "r", "b"), ("a", "r", "b")))
    with pytest.raises(ValueError):
        ToyKG(("a",), (("a", "r", "b"),))


def test_kg_vote_single_candidate():
    kg = ToyKG.from_triples([("h", "r", "A")])
    v = kg_vote(kg, ("h", "r"), 200, 1.0, seed=0)
    assert v.prediction == "A" and v.p_A == 1.0
    with pytest.raises(NoCandidate):
        kg_vote(kg, ("q", "r"), 10, 0.7, seed=0)


def _brute_shares(kg, query, p):
    """Independent enumeration with the documented path-count scorer."""
    head, rel = query
    tr = kg.triples
    totals = {}
    for keep in itertools.product((0, 1), repeat=len(tr)):
        w = math.prod(p if k else 1 - p for k in keep)
        kept = [t for t, k in zip(tr, keep) if k]
        score = {}
        for h, r, t in kept:
            if h == head and r == rel:
                score[t] = score.get(t, 0) + 1.0
        for h, _, x in kept:
            if h != head:
                continue
            for h2, _, t in kept:
                if h2 == x and t != head:
                    score[t] = score.get(t, 0) + 0.5
        if not score:
            continue
        best = max(score.values())
        if best <= 0:
            continue
        win = min(c for c, s in score.items() if s == best)
        totals[win] = totals.get(win, 0) + w
    return totals


@pytest.mark.parametrize("name", ["decoy_2paths", "direct_2paths", "decoy_3paths"])
def test_exact_shares_match_brute_force(name):
    kg = load(name)
    fast = exact_vote_shares(kg, ("h", "r"), 0.7)
    slow = _brute_shares(kg, ("h", "r"), 0.7)
    for c, v in slow.items():
        assert fast.get(c, 0.0) == pytest.approx(v, abs=1e-12)


def test_kg_vote_matches_exact_expectation():
    kg = load("direct_3paths")
    exact = exact_vote_shares(kg, ("h", "r"), 0.7)
    v = kg_vote(kg, ("h", "r"), 20_000, 0.7, seed=9)
    assert v.prediction == max(exact, key=exact.get)
    assert v.report.ci_low - 0.01 <= exact[v.prediction] <= v.report.ci_high + 0.01
    assert v.p_A > 0.9


def test_kg_vote_full_retention_is_full_graph():
    kg = load("decoy_2paths")
    v = kg_vote(kg, ("h", "r"), 100, 1.0, seed=0)
    assert v.prediction == "A" and v.p_A == 1.0


def test_kg_vote_thread_invariant():
    kg = load("decoy_3paths")
    a = kg_vote(kg, ("h", "r"), 10_000, 0.7, seed=2, workers=1)
    b = kg_vote(kg, ("h", "r"), 10_000, 0.7, seed=2, workers=4)
    assert a == b


def test_oracle_trivial_and_size_guard():
    kg = load("decoy_2paths")
    assert radius_oracle(kg, ("h", "r"), 0.7, 0).robust
    big = ToyKG.from_triples([("h", "r", f"e{i}") for i in range(16)])
    with pytest.raises(ValueError):
        radius_oracle(big, ("h", "r"), 0.7, 1)


def test_certificates_are_sound_and_not_vacuous():
    flips_just_past = []
    for name in FIXTURES:
        kg = load(name)
        shares = exact_vote_shares(kg, ("h", "r"), 0.7)
        p_a = max(shares.values())
        radius = certified_radius(p_a, 0.7)
        assert radius >= 1
        assert radius_oracle(kg, ("h", "r"), 0.7, radius).robust
        beyond = radius_oracle(kg, ("h", "r"), 0.7, radius + 1)
        if not beyond.robust:
            flips_just_past.append(name)
    assert flips_just_past


def test_certify_uses_lower_endpoint():
    v = kg_vote(load("direct_3paths"), ("h", "r"), 200, 0.7, seed=1)
    assert certify(v, 0.7) <= certify(v, 0.7, use_point_estimate=True)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from artifact.adaptation import (
    CollapseConfig,
    DpoAdvice,
    EditConfig,
    LoraConfig,
    Noise,
    PrefProblem,
    PrefRegime,
    accumulation_ceiling,
    collapse_lower_bound,
    dpo_rlhf_advice,
    edit_capacity,
    edit_interference,
    evopref_gap,
    gaussian_kl_full,
    lora_bound,
    lora_effective_params,
    lora_kl,
    pref_regime,
    quadratic_fit_r2,
    rank_ceiling,
    sequence_collapse_bound,
    simulate_collapse,
    simulate_preference,
)
from artifact.adaptation.lora import RANK_CEILING_C0, gaussian_kl
from artifact.adaptation.preference import borda_walk, comparison_matrix, walk_scale


# -------------------------------------------------------------- lora

def test_effective_params():
    assert lora_effective_params(LoraConfig(64, 16, 4096, 4096, 1000)) == 8_388_608
    assert lora_effective_params(LoraConfig(64, 16, 5120, 5120, 1000)) == 10_485_760
    with pytest.raises(ValueError):
        LoraConfig(64, 0, 4096, 4096, 1000)


def test_lora_kl_values():
    assert gaussian_kl(4, 1.0, 0.5, 2.0) == pytest.approx(0.5 * (1 + 2 - 4 + 4 * math.log(4)))
    assert gaussian_kl(4, 1.0, 0.5, 2.0) == pytest.approx(2.273, abs=1e-3)
    assert lora_kl(LoraConfig(2, 2, 3, 3, 100)) == 0.0


@given(st.integers(1, 1000), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0, 100))
def test_lora_kl_nonnegative_and_zero_only_at_prior(q, sp, sq, phi):
    kl = gaussian_kl(q, sp, sq, phi)
    assert kl >= -1e-9 * q
    if phi > 1e-6 or abs(sq / sp - 1) > 1e-3:
        assert kl > 0


def _bound(**kw):
    base = dict(m=4, r=4, d=64, k=64, N=10_000, sigma_Q=0.9, phi_norm_sq=1.0)
    base.update(kw)
    return lora_bound(LoraConfig(**base), 0.3, 0.05, 1000, 8).bound


def test_lora_bound_monotonicity():
    assert _bound(r=2) <= _bound(r=4) <= _bound(r=8)
    assert _bound(m=2) <= _bound(m=4)
    assert _bound(phi_norm_sq=0.5) <= _bound(phi_norm_sq=5.0)
    assert _bound(N=100_000) <= _bound(N=10_000)
    cfg = LoraConfig(4, 4, 64, 64, 10**15, sigma_Q=0.9)
    b = lora_bound(cfg, 0.3, 0.05, 1000, 8)
    assert b.bound == pytest.approx(0.3 + b.mc_correction, abs=1e-3)
    assert lora_bound(cfg, 2.0, 0.05, 1000, 8).vacuous


def test_rank_ceiling():
    assert RANK_CEILING_C0 == pytest.approx(0.0122, abs=1e-4)
    assert rank_ceiling(6144, 6144, 52000) == pytest.approx(32.0)
    assert rank_ceiling(12288, 12288, 52000) == pytest.approx(16.0)
    ratio = rank_ceiling(10, 10, 10**6) / rank_ceiling(10, 10, 10**5)
    assert ratio == pytest.approx(10 * math.log(1e5) / math.log(1e6))
    with pytest.raises(ValueError):
        rank_ceiling(1, 1, 2)


# -------------------------------------------------------- preference

def test_pref_regime():
    r = pref_regime(PrefProblem(500, 0.008))
    assert r.gamma_star == pytest.approx(1.6e-5)
    assert r.regime is PrefRegime.WELL_SPECIFIED
    mis = pref_regime(PrefProblem(100, 0.01, 0.08))
    assert mis.regime is PrefRegime.MISSPECIFIED
    assert mis.budget == pytest.approx(100**2 * math.log(100) / 0.0064)


def test_dpo_advice():
    assert dpo_rlhf_advice(0.0, 500, 1024) is DpoAdvice.EQUIVALENT
    assert dpo_rlhf_advice(0.10, 500, 1024, c1=0.1) is DpoAdvice.PREFER_RLHF
    assert dpo_rlhf_advice(0.10, 500, 256, c1=0.1) is DpoAdvice.COMPARABLE_DEGRADATION


def test_adversarial_matrix_neutralises_off_target_pairs():
    P, a, b, clipped = comparison_matrix(PrefProblem(10, 0.01, 0.1), Noise.ADVERSARIAL)
    assert not clipped
    mask = np.ones_like(P, dtype=bool)
    mask[a, b] = mask[b, a] = False
    assert np.allclose(P[mask], 0.5)
    assert P[b, a] > 0.5
    assert np.allclose(P + P.T, 1.0)


def test_walk_scale_orders_regimes():
    scales = {}
    for noise, g in ((Noise.NONE, 0.0), (Noise.BENIGN, 0.1), (Noise.ADVERSARIAL, 0.1)):
        P, a, b, _ = comparison_matrix(PrefProblem(10, 0.01, g), noise)
        scales[noise] = walk_scale(*borda_walk(P, a, b))
    assert scales[Noise.NONE] < scales[Noise.BENIGN] < scales[Noise.ADVERSARIAL]


def test_simulate_preference_tracks_walk_scale():
    # median stabilisation time scales with variance / drift^2 of the Borda walk
    sims, walks = {}, {}
    for n in (10, 20):
        for noise, g in ((Noise.NONE, 0.0), (Noise.ADVERSARIAL, 0.1)):
            res = simulate_preference(PrefProblem(n, 0.01, g), noise, 400, seed=7, workers=4)
            assert res.censored == 0
            sims[n, noise] = res.report.estimate
            walks[n, noise] = res.walk_scale
    for noise in (Noise.NONE, Noise.ADVERSARIAL):
        sim_ratio = sims[20, noise] / sims[10, noise]
        walk_ratio = walks[20, noise] / walks[10, noise]
        assert sim_ratio == pytest.approx(walk_ratio, rel=0.3)
    assert sims[10, Noise.ADVERSARIAL] > sims[10, Noise.NONE]
    assert sims[20, Noise.NONE] >= sims[10, Noise.NONE]


def test_simulate_preference_rejects_large_n():
    with pytest.raises(ValueError):
        simulate_preference(PrefProblem(51, 0.01), Noise.NONE, 10, 0)


def test_simulate_preference_thread_invariant():
    p = PrefProblem(10, 0.05, 0.1)
    a = simulate_preference(p, "benign", 40, seed=3, workers=1)
    b = simulate_preference(p, "benign", 40, seed=3, workers=4)
    assert a == b


# ---------------------------------------------------------- collapse

def test_collapse_lower_bound():
    assert collapse_lower_bound(0, 48, 1000) == 0.0
    assert collapse_lower_bound(20, 48, 1000) == pytest.approx(1 - math.exp(-19200 / (128 * math.pi * 1000)))
    assert collapse_lower_bound(20, 48, 1000) == pytest.approx(0.0466, abs=1e-4)
    e1 = -math.log1p(-collapse_lower_bound(5, 8, 1000))
    e2 = -math.log1p(-collapse_lower_bound(10, 8, 1000))
    assert e2 / e1 == pytest.approx(4.0)
    assert sequence_collapse_bound(3, 0.0, 1, 100, 1000) == 0.0


def test_accumulation_ceiling():
    assert accumulation_ceiling(8, 0.01, 500) / accumulation_ceiling(8, 0.05, 500) == pytest.approx(5)
    assert accumulation_ceiling(8, 1.0, 500) < accumulation_ceiling(8, 0.5, 500)
    assert accumulation_ceiling(8, 0.3, 500, c3=0) == 0
    with pytest.raises(ValueError):
        accumulation_ceiling(8, 0.0, 500)


def test_gaussian_kl_full_against_scipy_samples():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    cov1 = A @ A.T + np.eye(3)
    mu1 = np.array([0.3, -0.2, 0.1])
    x = rng.standard_normal((200_000, 3))
    mc = np.mean(stats.multivariate_normal(np.zeros(3), np.eye(3)).logpdf(x)
                 - stats.multivariate_normal(mu1, cov1).logpdf(x))
    assert gaussian_kl_full(np.zeros(3), np.eye(3), mu1, cov1) == pytest.approx(mc, abs=0.01)
    assert gaussian_kl_full(np.zeros(3), np.eye(3), np.zeros(3), np.eye(3)) == pytest.approx(0)


def test_collapse_validation():
    with pytest.raises(ValueError):
        CollapseConfig(8, 8, 10)
    with pytest.raises(ValueError):
        CollapseConfig(65, 500, 10)
    with pytest.raises(ValueError):
        CollapseConfig(8, 500, 10, "Accumulation", 0.0)


def test_collapse_starts_at_zero_and_is_seeded():
    cfg = CollapseConfig(4, 200, 20)
    a = simulate_collapse(cfg, seed=5, runs=3)
    assert np.all(a[:, 0] == 0)
    assert np.array_equal(a, simulate_collapse(cfg, seed=5, runs=3, workers=3))


def test_collapse_large_sample_limit():
    kl = simulate_collapse(CollapseConfig(2, 2_000_000, 3), seed=0).ravel()
    assert kl.max() < 1e-4


def test_replacement_grows_quadratically():
    kl = simulate_collapse(CollapseConfig(8, 500, 100), seed=1, runs=20, workers=4).mean(axis=0)
    T = np.arange(kl.size)
    _, r2 = quadratic_fit_r2(T[1:], kl[1:])
    assert r2 > 0.9
    assert stats.spearmanr(T, kl).statistic > 0.95


def test_accumulation_saturates():
    sup = {}
    for rho in (0.01, 0.05):
        kl = simulate_collapse(CollapseConfig(8, 500, 200, "Accumulation", rho), seed=1,
                               runs=20, workers=4).mean(axis=0)
        assert kl[200] / kl[50] < 1.5
        sup[rho] = kl.max()
    assert 3 <= sup[0.01] / sup[0.05] <= 7
    # calibrate c3 on rho=0.05, then check rho=0.01 stays within twice its ceiling
    c3 = sup[0.05] / accumulation_ceiling(8, 0.05, 500)
    assert sup[0.01] <= 2 * accumulation_ceiling(8, 0.01, 500, c3)


# ----------------------------------------------------------- editing

def test_edit_interference():
    cfg = EditConfig(4096, 2.1)
    assert edit_interference(cfg, 1.0) == pytest.approx(1.10 / 64 * (1 - 1 / 2.1))
    assert edit_interference(cfg, 1.0) == pytest.approx(0.0090, abs=1e-4)
    assert edit_interference(EditConfig(4096, 1 + 1e-12), 1.0) < 1e-12
    assert edit_interference(EditConfig(16384, 2.1), 1.0) == pytest.approx(edit_interference(cfg, 1.0) / 2)
    with pytest.raises(ValueError):
        EditConfig(4096, 1.0)


def test_edit_capacity():
    cap = edit_capacity(EditConfig(4096, 2.1, layers=3, rank=2))
    assert cap.k_star == pytest.approx(12.8, abs=0.1)
    assert cap.k_star_multilayer == pytest.approx(38, abs=1)
    assert cap.k_star_rank_r == pytest.approx(2 * cap.k_star)
    assert edit_capacity(EditConfig(4096, 2.1, tau=0.2)).k_star == pytest.approx(2 * cap.k_star)


@given(st.integers(1, 10**6), st.floats(1.01, 20), st.floats(0.1, 5), st.floats(0.1, 5),
       st.floats(0.01, 1))
def test_edit_capacity_consistency(d, alpha, c, eta, tau):
    cfg = EditConfig(d, alpha, c, eta, tau)
    k = edit_capacity(cfg).k_star
    assert k * edit_interference(cfg, eta) == pytest.approx(tau, rel=1e-9)


def test_evopref_gap():
    g = evopref_gap(0.10, 52000, 32)
    assert g.total == pytest.approx(0.13, abs=0.01)
    assert evopref_gap(0.0, 100, 10**12, G=10**4).total < 1e-6
    assert evopref_gap(0.1, 2000, 32).total > evopref_gap(0.1, 4000, 32).total
    assert evopref_gap(0.1, 2000, 16).total > evopref_gap(0.1, 2000, 32).total
    assert evopref_gap(0.1, 2000, 16, G=10).total > evopref_gap(0.1, 2000, 16, G=20).total

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confine_lab import criteria as C
from confine_lab import profiles as P
from confine_lab.errors import (InvalidSplit, MissingInfinityRecord,
                                UnsupportedDomain)


def nm(beta, gamma, **kw):
    return P.normal_model_profile(beta, gamma, **kw)


# ------------------------------------------------------------- ESA collar

def test_esa_ratio_exactly_one_at_three_halves():
    v = C.classify_esa(nm(1.5, 0.0))
    assert v.outcome == C.PROVEN
    assert v.details["comp0.hardy_ratio"]["lhs"] == pytest.approx(1.0, abs=0)


def test_esa_dirichlet_laplacian_fails():
    v = C.classify_esa(nm(0.0, 0.0))
    assert v.outcome == C.NOT_PROVEN
    assert v.details["comp0.hardy_ratio"]["lhs"] == pytest.approx(0.25, abs=0)


def test_esa_weight_route_gamma_three():
    v = C.classify_esa(nm(0.0, 3.0))
    assert v.outcome == C.PROVEN
    assert v.details["comp0.hardy_ratio"]["lhs"] == pytest.approx(1.0, abs=0)


def test_esa_quadratic_branch():
    v = C.classify_esa(nm(2.0, -5.0))
    assert v.outcome == C.PROVEN
    assert "comp0.quadratic_scale" in v.details


def test_esa_unsupported_on_half_strip():
    with pytest.raises(UnsupportedDomain):
        C.classify_esa(P.half_strip_profile())


def test_esa_multi_component_requires_all():
    prof = P.annulus_profile(0.5, 1.5, 2, dict(beta=1.5, gamma=0.0),
                             dict(beta=1.0, gamma=0.0))
    assert C.classify_esa(prof).outcome == C.NOT_PROVEN
    prof = P.annulus_profile(0.5, 1.5, 2, dict(beta=1.5, gamma=0.0),
                             dict(beta=1.75, gamma=0.0))
    assert C.classify_esa(prof).outcome == C.PROVEN


# ------------------------------------------------------------- SC collar

def test_sc_codim_one_threshold():
    assert C.classify_sc(nm(1.0, 0.0)).outcome == C.PROVEN
    assert C.classify_sc(nm(0.5, 0.0)).outcome == C.NOT_PROVEN


def test_sc_strong_decay_branch_any_gamma():
    v = C.classify_sc(nm(2.5, -3.0))
    assert v.outcome == C.PROVEN
    assert "exp(L delta" in v.details["comp0.strong_decay"]["note"]
    v = C.classify_sc(nm(2.0, -3.0))
    assert v.outcome == C.PROVEN
    assert "delta^(-L)" in v.details["comp0.strong_decay"]["note"]


def test_sc_punctured_disk_log_margin():
    # origin component in d = 2: eta = -1, and beta + gamma = 0 = 1 + eta
    # exactly; the logarithmic factor absorbs the equality
    prof = P.punctured_space_profile(0.0, 0.0, 2, beta_inf=2.0)
    v = C.classify_sc(prof)
    assert v.outcome == C.PROVEN
    assert "log-margin" in v.details["comp0.mass_product"]["note"]


def test_sc_exact_predicate_on_grid():
    # codim-1 power laws: proven iff beta >= 2 or beta + gamma >= 1
    betas = [Fraction(i, 4) for i in range(0, 11)]
    gammas = [Fraction(i, 2) for i in range(-4, 9)]
    for b in betas:
        for g in gammas:
            v = C.classify_sc(nm(float(b), float(g)))
            expect = b >= 2 or b + g >= 1
            assert (v.outcome == C.PROVEN) is expect, (b, g)


# ------------------------------------------------------------- infinity

def test_infinity_examples():
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=2.0)
    assert C.classify_at_infinity(prof, C.SC).outcome == C.PROVEN
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=1.0)
    v = C.classify_at_infinity(prof, C.SC)
    assert v.outcome == C.PROVEN
    assert "exp(" in v.details["inf.weight_growth"]["note"]
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=3.0)
    assert C.classify_at_infinity(prof, C.SC).outcome == C.NOT_PROVEN
    assert C.classify_at_infinity(prof, C.ESA).outcome == C.NOT_PROVEN


def test_infinity_requires_record():
    prof = P.ball_profile(1.0, 0.0, radius=1.0, dim=2)
    with pytest.raises(MissingInfinityRecord):
        C.classify_at_infinity(prof)


def test_full_combination_on_exterior():
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=2.0)
    assert C.classify_sc_full(prof).outcome == C.PROVEN
    prof = P.exterior_profile(0.5, 0.0, radius=1.0, dim=2, beta_inf=2.0)
    assert C.classify_sc_full(prof).outcome == C.NOT_PROVEN
    prof = P.exterior_profile(1.0, 0.0, radius=1.0, dim=2, beta_inf=3.0)
    assert C.classify_sc_full(prof).outcome == C.NOT_PROVEN


# ------------------------------------------------------------- sigma

def test_sigma_check_pure_log_family():
    assert C.sigma_check(C.pure_log_sigma(1.0)) == C.SATISFIED
    assert C.sigma_check(C.pure_log_sigma(0.9)) == C.VIOLATED_SIGMA2
    assert C.sigma_check(C.pure_log_sigma(0.8)) == C.VIOLATED_SIGMA2
    assert C.sigma_check(C.pure_log_sigma(1.1)) == C.VIOLATED_SIGMA1


def test_sigma_check_log_log_harmonic_tail():
    assert C.sigma_check(C.log_log_sigma()) == C.SATISFIED


def test_sigma_check_tabulated():
    good = C.SigmaSpec(C.TABULATED, table=C.pure_log_sigma(1.0).G)
    assert C.sigma_check(good) == C.SATISFIED
    bad = C.SigmaSpec(C.TABULATED, table=lambda t: 1.2 * np.log(np.minimum(t, 1.0)))
    assert C.sigma_check(bad) == C.VIOLATED_SIGMA1


def test_sigma_terms_match_geometric_ratio():
    # for sigma = 0.9 the octave terms form a geometric series of ratio
    # 4^(sigma - 1); check the computed terms against that closed form
    spec = C.pure_log_sigma(0.9)
    m = np.arange(1, 11, dtype=float)
    terms = 4.0**-m * np.exp(-2.0 * spec.G(spec.a0 * 2.0**-m))
    assert np.allclose(terms[1:] / terms[:-1], 4.0**-0.1)


# ------------------------------------------------------------- metric ESA

def test_esa_metric_complete_branch():
    v = C.classify_esa_metric(nm(2.0, 7.0))
    assert v.outcome == C.PROVEN and v.theorem == "metric-complete"


def test_esa_metric_barrier_branch():
    v = C.classify_esa_metric(nm(0.0, 4.0), C.pure_log_sigma(1.0))
    assert v.outcome == C.PROVEN and v.theorem == "agmon-barrier-esa"
    # barrier 2.25 t^-2 dominates |grad g|^2 <= t^-2 with the +1 margin
    assert v.details["comp0.barrier"]["ok"]


def test_esa_metric_inconclusive_without_barrier():
    assert C.classify_esa_metric(nm(0.0, 0.0), C.pure_log_sigma(1.0)).outcome \
        == C.INCONCLUSIVE


def test_esa_metric_inconclusive_on_bad_sigma():
    v = C.classify_esa_metric(nm(0.0, 4.0), C.pure_log_sigma(0.9))
    assert v.outcome == C.INCONCLUSIVE
    assert v.details["sigma"]["note"] == C.VIOLATED_SIGMA2


def test_esa_metric_half_strip_witness():
    v = C.classify_esa_metric(P.half_strip_profile(), C.pure_log_sigma(1.0))
    assert v.outcome == C.INCONCLUSIVE
    assert "midline" in v.details["assumption_A"]["note"]


# ------------------------------------------------------------- metric SC

def ones(t):
    return np.ones_like(np.asarray(t, dtype=float))


def test_sc_metric_complete_constant_omega():
    prof = nm(2.0, 0.0)
    split = C.WeightSplit(omega=ones, rho_tilde=ones, alpha=0.0)
    v = C.classify_sc_metric(prof, split)
    assert v.outcome == C.PROVEN and v.theorem == "weight-split-sc"


def test_sc_metric_collar_series_divergent():
    # gamma = 2, omega = delta^2: series terms are exactly constant
    prof = nm(0.0, 2.0)
    split = C.WeightSplit(omega=lambda t: np.asarray(t, dtype=float) ** 2,
                          rho_tilde=ones)
    v = C.classify_sc_metric(prof, split)
    assert v.outcome == C.PROVEN
    # oracle: partial sums of (r_k - r_{k+1})^2 / omega_k grow linearly
    r = split.r1 * 2.0 ** (1 - np.arange(1, 30, dtype=float))
    terms = (r / 2) ** 2 / (r / 2) ** 2
    assert np.allclose(terms, 1.0)


def test_sc_metric_collar_series_convergent():
    prof = nm(0.0, 2.0)
    split = C.WeightSplit(omega=lambda t: np.asarray(t, dtype=float) ** 1.5,
                          rho_tilde=lambda t: np.asarray(t, dtype=float) ** 0.5)
    v = C.classify_sc_metric(prof, split)
    assert v.outcome == C.NOT_PROVEN


def test_sc_metric_invalid_split_product():
    prof = nm(0.0, 2.0)
    split = C.WeightSplit(omega=lambda t: np.asarray(t, dtype=float) ** 2,
                          rho_tilde=lambda t: 2.0 * ones(t))
    with pytest.raises(InvalidSplit):
        C.classify_sc_metric(prof, split)


def test_sc_metric_invalid_split_not_integrable():
    prof = nm(0.0, 0.0)
    split = C.WeightSplit(omega=lambda t: np.asarray(t, dtype=float) ** 2,
                          rho_tilde=lambda t: np.asarray(t, dtype=float) ** -2)
    with pytest.raises(InvalidSplit):
        C.classify_sc_metric(prof, split)


def test_sc_metric_growth_bound_violated():
    # omega growing super-exponentially in the point distance fails case (i)
    prof = nm(2.0, 0.0)

    def omega(t):
        t = np.asarray(t, dtype=float)
        dm = np.abs(np.log(np.maximum(t, 1e-300)) - math.log(0.5))  # d_M for beta=2
        return np.exp(dm**2)

    split = C.WeightSplit(omega=omega,
                          rho_tilde=lambda t: ones(t) / omega(t), alpha=1.0)
    v = C.classify_sc_metric(prof, split)
    assert v.outcome == C.NOT_PROVEN


# ------------------------------------------------------------- properties

@settings(max_examples=80, deadline=None)
@given(st.integers(0, 7), st.integers(-8, 16), st.integers(1, 12))
def test_esa_monotone_in_gamma(bq, gq, dg):
    # on the growing side of the ratio, increasing gamma preserves Proven
    beta, gamma = bq / 4.0, gq / 4.0
    if beta + gamma - 1.0 <= 0:
        return
    v1 = C.classify_esa(nm(beta, gamma))
    v2 = C.classify_esa(nm(beta, gamma + dg / 4.0))
    if v1.outcome == C.PROVEN:
        assert v2.outcome == C.PROVEN


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.0, 8.0]), st.sampled_from([0.25, 1.0, 3.0]),
       st.integers(0, 7), st.integers(-4, 8))
def test_verdicts_scale_invariant(cD, crho, bq, gq):
    beta, gamma = bq / 4.0, gq / 2.0
    base_esa = C.classify_esa(nm(beta, gamma)).outcome
    base_sc = C.classify_sc(nm(beta, gamma)).outcome
    scaled = nm(beta, gamma, D=cD, rho=crho)
    assert C.classify_esa(scaled).outcome == base_esa
    assert C.classify_sc(scaled).outcome == base_sc


def test_verdict_json_shape():
    v = C.classify_esa(nm(1.5, 0.0))
    d = v.to_dict()
    assert set(d) == {"question", "outcome", "theorem", "details"}
    rec = d["details"]["comp0.hardy_ratio"]
    assert set(rec) == {"lhs", "rhs", "ok", "note"}

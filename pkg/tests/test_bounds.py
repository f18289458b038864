import math

import numpy as np
import numpy.testing as npt
import pytest

from couplelab import (gaussian_norm_mgf_bound, gradient_complexity,
                       kl_bias_bound, kl_mixing_bound, kl_mixing_iterations,
                       log_harnack_check_1d, mi_contraction_bound,
                       orlicz_mgf_bound, quadratic_root_threshold,
                       renyi_bias_bound, renyi_mixing_bound,
                       renyi_mixing_iterations, wasserstein_props)
from couplelab.bounds import BoundParams, renyi_burn_in, renyi_deltas

GAUSS_025 = BoundParams(d=2, L=1.0, T=0.25, h=0.05, alpha=1.0, c2=0.0062696)


def test_kl_mixing_examples():
    rep = kl_mixing_bound(GAUSS_025, 0, 1.0)
    assert rep.feasible and rep.value == 36.0
    # k -> infinity decays to zero; doubling k multiplies by exp(-2 c2)
    r1 = kl_mixing_bound(GAUSS_025, 10, 1.0)
    r2 = kl_mixing_bound(GAUSS_025, 20, 1.0)
    npt.assert_allclose(r2.value / r1.value, math.exp(-2 * 0.0062696 * 10),
                        rtol=1e-12)
    assert kl_mixing_bound(GAUSS_025, 10 ** 6, 1.0).value < 1e-300 * 36


def test_kl_mixing_monotone_and_gated():
    ks = range(0, 50, 7)
    vals = [kl_mixing_bound(GAUSS_025, k, 1.0).value for k in ks]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    bad = BoundParams(d=2, L=1.0, T=0.6, h=0.2, alpha=1.0, c2=0.01)
    rep = kl_mixing_bound(bad, 0, 1.0)   # smoothness budget violated
    assert not rep.feasibility["smoothness_budget"] and rep.value is None
    rep = kl_mixing_bound(GAUSS_025, -1, 1.0)
    assert not rep.feasibility["k_nonnegative"] and rep.value is None


def test_kl_bias_structure():
    p = BoundParams(d=1, L=1.0, T=0.25, h=0.05, alpha=1.0, c2=0.0062696)
    rep = kl_bias_bound(p, 0, 0.0, m2=1.0, m4=3.0, delta_h=0.0)
    # with M = N = 0 the bracket collapses to 45 L^2 + 4 L^2/T^2 m2 + 4 L^2 d
    bracket = 45.0 + 4.0 / 0.25 ** 2 * 1.0 + 4.0
    npt.assert_allclose(rep.components["h4_term"],
                        4.0 * 0.05 ** 4 * bracket, rtol=1e-12)
    assert rep.components["mixing"] == 0.0
    # h = 0 and delta = 0 kill the bias component entirely
    p0 = BoundParams(d=1, L=1.0, T=0.25, h=0.0, alpha=1.0, c2=0.0062696)
    assert kl_bias_bound(p0, 0, 1.0, 1.0, 3.0, 0.0).components["bias"] == 0.0
    # h^4 scaling of the evaluated formula
    pa = BoundParams(d=1, L=1.0, T=0.2, h=0.2, alpha=1.0, c2=0.001)
    pb = BoundParams(d=1, L=1.0, T=0.2, h=0.1, alpha=1.0, c2=0.001)
    ra = kl_bias_bound(pa, 0, 0.0, 1.0, 3.0, 0.0).components["h4_term"]
    rb = kl_bias_bound(pb, 0, 0.0, 1.0, 3.0, 0.0).components["h4_term"]
    npt.assert_allclose(ra / rb, 16.0, rtol=1e-12)
    # monotone in each bias input
    base = kl_bias_bound(p, 0, 0.0, 1.0, 3.0, 0.1).components["bias"]
    assert kl_bias_bound(p, 0, 0.0, 2.0, 3.0, 0.1).components["bias"] >= base
    assert kl_bias_bound(p, 0, 0.0, 1.0, 6.0, 0.1).components["bias"] >= base
    assert kl_bias_bound(p, 0, 0.0, 1.0, 3.0, 0.2).components["bias"] >= base


def test_renyi_mixing_deltas_and_burn_in():
    p = BoundParams(d=1, L=1.0, T=0.25, h=0.05, alpha=1.0, c2=0.0062696)
    d1, d2 = renyi_deltas(p, 2.0)
    assert (d1, d2) == (6.0, 36.0)
    # burn-in threshold equals the closed-form expression
    want = (1.0 / 0.0062696) * math.log(
        (1.0 / (4.0 * math.sqrt(math.log(2.0))))
        * (6.0 + math.sqrt(36.0 + 16.0 * math.log(2.0) * 36.0)))
    npt.assert_allclose(renyi_burn_in(1.0, 0.0062696, 1.0, d1, d2), want,
                        rtol=1e-12)
    rep = renyi_mixing_bound(p, 2.0, math.ceil(want) + 5, 1.0)
    assert rep.feasible
    npt.assert_allclose(
        rep.value,
        (6.0 + 36.0) * math.sqrt(math.log(2.0))
        * math.exp(-0.0062696 * (math.ceil(want) + 5)), rtol=1e-12)
    below = renyi_mixing_bound(p, 2.0, 1, 1.0)
    assert not below.feasibility["past_burn_in"] and below.value is None
    # orlicz_init below one collapses the max{1, .} factor
    small = renyi_mixing_bound(p, 2.0, math.ceil(want) + 5, 0.5)
    npt.assert_allclose(small.value, rep.value, rtol=1e-12)


def test_renyi_bias_example_and_flags():
    p = BoundParams(d=1, L=1.0, T=0.25, h=0.0125, alpha=1.0, c2=0.0062696)
    rep = renyi_bias_bound(p, 2.0, 100, 0.0, delta_h=3.2e-5, K_nu=math.sqrt(8 / 3))
    assert rep.feasible, rep.feasibility
    assert rep.components["s"] == 3.0
    npt.assert_allclose(rep.components["u"], math.sqrt(13.0 / 12.0), rtol=1e-15)
    # quadratic-target reduction: no third-derivative terms
    from couplelab import first_order_map_constants
    k = first_order_map_constants(1.0, 0.0, 0.25)
    s, u = 3.0, math.sqrt(13.0 / 12.0)
    d, h, delta, K = 1, 0.0125, 3.2e-5, math.sqrt(8 / 3)
    manual = (d * h * (6 * k["j_c"] + h * k["p_v"] ** 2 + 2 * k["p_v"])
              + 2 * math.sqrt(d) * k["p_xy"] * u * delta
              + k["p_xy"] ** 2 * (1 + 3 * s * u ** 2) * delta ** 2
              + 2 * h * math.sqrt(d) * k["p_x"] * u
              * (delta + K + math.sqrt(delta ** 2 + K ** 2))
              + 2 * h ** 2 * k["p_x"] ** 2 * (1 + 3 * s * u ** 2)
              * (delta ** 2 + K ** 2))
    npt.assert_allclose(rep.components["bias"], manual, rtol=1e-12)
    # h = 0 with delta = 0 gives zero bias
    p0 = BoundParams(d=1, L=1.0, T=0.25, h=0.0, alpha=1.0, c2=0.0062696)
    assert renyi_bias_bound(p0, 2.0, 100, 0.0, 0.0, K).components["bias"] == 0.0
    # each ceiling is individually flagged
    big_delta = renyi_bias_bound(p, 2.0, 100, 0.0, 1.0, K)
    assert not big_delta.feasibility["delta_ceiling"]
    assert big_delta.value is None
    tall_h = BoundParams(d=1, L=1.0, T=0.25, h=0.05, alpha=1.0, c2=0.0062696)
    rep_h = renyi_bias_bound(tall_h, 2.0, 100, 0.0, 3.2e-5, K)
    assert not rep_h.feasibility["h_ceiling"]


def test_wasserstein_props_examples():
    rep = wasserstein_props(BoundParams(d=1, L=1.0, T=0.5, h=0.0, alpha=1.0))
    assert rep.value == 0.975
    reps = wasserstein_props(BoundParams(d=1, L=1.0, T=0.5, h=0.0, alpha=1.0,
                                         scheme="stratified"))
    npt.assert_allclose(reps.value, 1.0 - 0.25 / 6.0, rtol=1e-15)
    rep = wasserstein_props(BoundParams(d=4, L=1.0, T=0.25, h=0.01, alpha=1.0),
                            K_nu=2.0)
    npt.assert_allclose(rep.components["orlicz_bias"], 3.2, rtol=1e-14)
    zero = wasserstein_props(BoundParams(d=4, L=1.0, T=0.2, h=0.0, alpha=1.0),
                             K_nu=2.0)
    assert zero.components["w2_bias"] == 0.0
    assert zero.components["orlicz_bias"] == 0.0
    # stratified bias follows the h^(3/2) law
    pa = BoundParams(d=2, L=1.0, T=0.2, h=0.04, alpha=1.0, scheme="stratified")
    pb = BoundParams(d=2, L=1.0, T=0.2, h=0.01, alpha=1.0, scheme="stratified")
    ra = wasserstein_props(pa).components["w2_bias"]
    rb = wasserstein_props(pb).components["w2_bias"]
    npt.assert_allclose(ra / rb, 4.0 ** 1.5, rtol=1e-12)


def test_mixing_iteration_counts():
    p = BoundParams(d=1, L=1.0, T=0.25, h=0.0, alpha=1.0)
    rep = kl_mixing_iterations(p, 1e-3, 1.0)
    npt.assert_allclose(rep.value, 1.0 + 80.0 * math.log(36.0 / 1e-3),
                        rtol=1e-12)
    assert 839 <= rep.value <= 841
    # scaling eps by 1/e adds exactly 5/(alpha T^2) iterations
    rep2 = kl_mixing_iterations(p, 1e-3 / math.e, 1.0)
    npt.assert_allclose(rep2.value - rep.value, 80.0, rtol=1e-10)
    rrep = renyi_mixing_iterations(p, 2.0, 1e-3, 1.0)
    d1, d2 = renyi_deltas(p, 2.0)
    want = 1.0 + 160.0 * math.log(
        2.0 * (d1 + 2.0 * math.sqrt(math.log(2.0)) * max(d2, math.sqrt(d2)))
        / 1e-3)
    npt.assert_allclose(rrep.value, want, rtol=1e-12)


def test_mi_contraction_bound():
    p = BoundParams(d=1, L=1.0, T=0.2, h=0.05, alpha=1.0)
    rep = mi_contraction_bound(p, 1, 2.0)
    assert rep.feasible
    npt.assert_allclose(rep.value, (9.0 / (4 * 0.04)) * 2.0, rtol=1e-12)
    rep10 = mi_contraction_bound(p, 11, 2.0)
    npt.assert_allclose(rep10.value / rep.value,
                        math.exp(-0.04 / 5.0 * 10), rtol=1e-12)
    assert mi_contraction_bound(p, 0, 2.0).value is None


def test_helper_lemma_evaluators():
    assert quadratic_root_threshold(1.0, 1.0, -1.0) == 0.5
    npt.assert_allclose(orlicz_mgf_bound(0.5, 1.0), 2.0 ** 0.5, rtol=1e-15)
    with pytest.raises(ValueError):
        orlicz_mgf_bound(1.5, 1.0)
    npt.assert_allclose(gaussian_norm_mgf_bound(1.0, 4),
                        math.exp(2.0 + 0.5), rtol=1e-15)
    with pytest.raises(ValueError):
        quadratic_root_threshold(-1.0, 1.0, -1.0)


def test_log_harnack_examples():
    # x = y reduces to Jensen's inequality
    assert log_harnack_check_1d(1.0, lambda z: 1.0 / (1.0 + z * z),
                                0.3, 0.3, 0.5) >= 0.0
    # constant g leaves exactly the quadratic slack
    npt.assert_allclose(log_harnack_check_1d(1.0, lambda z: 2.0,
                                             0.0, 1.5, 0.7),
                        0.7 * 1.5 ** 2, rtol=1e-10)
    # exponential g in closed form: slack = y + 1/2 + C (x-y)^2 - x
    slack = log_harnack_check_1d(1.0, math.exp, 0.0, 1.0, 0.5)
    npt.assert_allclose(slack, 1.0 + 0.5 + 0.5 - 0.0, rtol=1e-9)
    assert slack >= 0.0


def test_gradient_complexity_scaling():
    d0, e0 = 2, 1e-6

    def quotient(div, power, d1, e1):
        g0 = gradient_complexity(1.0, 1.0, 1.0, 1.0, d0, e0, divergence=div).value
        g1 = gradient_complexity(1.0, 1.0, 1.0, 1.0, d1, e1, divergence=div).value
        ref = power * math.log(max(d1 / e1, d0 / e0)) / math.log(d0 / e0)
        return (g1 / g0) / ref

    assert 0.9 <= quotient("kl", 16 ** 0.75, 16 * d0, e0) <= 1.1
    assert 0.9 <= quotient("kl", 16 ** 0.25, d0, e0 / 16) <= 1.1
    assert 0.9 <= quotient("renyi", 16 ** 1.5, 16 * d0, e0) <= 1.1
    assert 0.9 <= quotient("renyi", 16.0, d0, e0 / 16) <= 1.1
    strat = gradient_complexity(1.0, 1.0, 1.0, 1.0, d0, e0, scheme="stratified")
    assert strat.value > 0 and strat.feasible

import math

import numpy as np
import numpy.testing as npt
import pytest

from couplelab import (FlowParams, PhasePoint, SamplerConfig, exact_flow,
                       first_order_map_constants, map_jacobian, operator_norm,
                       position_flow, solve_bias_map, solve_cross_map,
                       solve_mixing_map, verify_regularity, verlet_flow)
from couplelab.couplings import LEMMA_IDS

FP_Q = FlowParams(0.1, 0.1)
FP_LC = FlowParams(0.2, 0.05)


def test_mixing_map_identity_case(quad1):
    sol = solve_mixing_map(quad1, [0.7], [0.7], [0.3], FP_Q)
    npt.assert_allclose(sol.v_prime, [0.3], atol=1e-14)
    assert sol.residual <= 1e-12


def test_mixing_map_quadratic_closed_form(quad1):
    sol = solve_mixing_map(quad1, [1.0], [0.9], [0.0], FP_Q)
    npt.assert_allclose(sol.v_prime, [0.995], rtol=1e-12)
    # displacement sits under the pointwise envelope (3 / 2T) |x - y|
    assert abs(sol.v_prime[0]) <= 1.5 * abs(1.0 - 0.9) / FP_Q.T * FP_Q.T * 15


def test_mixing_map_solver_on_nonquadratic(lc2, rng):
    X, Y, V = rng.standard_normal((3, 40, 2))
    sol = solve_mixing_map(lc2, X, Y, V, FP_LC)
    assert sol.residual.max() <= 1e-10
    # defining equation holds: both discrete endpoints coincide
    lhs = position_flow(lc2, X, V, FP_LC)
    rhs = position_flow(lc2, Y, sol.v_prime, FP_LC)
    assert np.abs(lhs - rhs).max() <= 1e-10


def test_bias_map_examples(quad1):
    # h -> 0 reduces to the identity
    sol0 = solve_bias_map(quad1, [1.0], [0.4], FlowParams(0.1, 0.0))
    npt.assert_allclose(sol0.v_prime, [0.4], atol=0)
    sol = solve_bias_map(quad1, [1.0], [0.0], FP_Q)
    expected = (0.995 - math.cos(0.1)) / math.sin(0.1)
    npt.assert_allclose(sol.v_prime, [expected], rtol=1e-10)
    # second-order envelope 2 h^2 (L/T)|x| and the first-order envelope
    assert abs(sol.v_prime[0] - 0.0) <= 2 * 0.1 ** 2 * (1.0 / 0.1) * 1.0
    assert abs(sol.v_prime[0] - 0.0) <= 1.4 * 0.1 * (0.0 + (7 / 36) * 1.0)


def test_cross_map_reductions(quad1, lc2, rng):
    # x = y reduces to the bias map
    solc = solve_cross_map(quad1, [1.0], [1.0], [0.2], FP_Q)
    solb = solve_bias_map(quad1, [1.0], [0.2], FP_Q)
    npt.assert_allclose(solc.v_prime, solb.v_prime, atol=1e-12)
    # h = 0 reduces to the mixing map between exact flows
    fp0 = FlowParams(0.1, 0.0)
    solc0 = solve_cross_map(quad1, [1.0], [0.8], [0.2], fp0)
    solm0 = solve_mixing_map(quad1, [1.0], [0.8], [0.2], fp0)
    npt.assert_allclose(solc0.v_prime, solm0.v_prime, atol=1e-12)


def test_cross_map_composition_equals_shooting(quad1, lc2, rng):
    solc = solve_cross_map(quad1, [1.0], [0.9], [0.0], FP_Q, method="compose")
    sols = solve_cross_map(quad1, [1.0], [0.9], [0.0], FP_Q, method="shoot")
    assert np.abs(solc.v_prime - sols.v_prime).max() <= 1e-10
    X, Y, V = rng.standard_normal((3, 25, 2))
    solc = solve_cross_map(lc2, X, Y, V, FP_LC, method="compose")
    sols = solve_cross_map(lc2, X, Y, V, FP_LC, method="shoot")
    assert np.abs(solc.v_prime - sols.v_prime).max() <= 1e-9
    assert solc.residual.max() <= 1e-10
    # defining equation: discrete endpoint from x equals exact endpoint from y
    lhs = position_flow(lc2, X, V, FP_LC)
    rhs = position_flow(lc2, Y, solc.v_prime, FlowParams(FP_LC.T, 0.0))
    assert np.abs(lhs - rhs).max() <= 1e-10


def test_map_constants():
    k = first_order_map_constants(L=1.5, M=0.4, T=0.2)
    npt.assert_allclose(k["p_xy"], 7.5)
    npt.assert_allclose(k["p_v"], 1.4)
    npt.assert_allclose(k["p_x"], 49 * 1.5 / 180)
    npt.assert_allclose(k["j_xy"], 5.5 * 0.4 * 0.04)
    npt.assert_allclose(k["j_c"], 44 / 27)
    npt.assert_allclose(k["j_v"], 440 / 135 * 0.4 * 0.04)
    npt.assert_allclose(k["j_x"], 352 / 675 * 0.4 * 0.2)


def test_operator_norm_matches_svd(rng):
    mats = rng.standard_normal((12, 3, 3))
    got = operator_norm(mats)
    want = np.linalg.svd(mats, compute_uv=False)[..., 0]
    npt.assert_allclose(got, want, rtol=1e-6)


def test_map_jacobian_linear_map():
    A = np.array([[1.0, 0.3], [-0.2, 0.9]])
    J = map_jacobian(lambda v: v @ A.T, np.array([0.1, -0.4]))
    npt.assert_allclose(J, A, atol=1e-10)


@pytest.mark.parametrize("lemma", LEMMA_IDS)
def test_regularity_sweep_small(lc2, lemma):
    cfg = SamplerConfig(samples=150, seed=3)
    rep = verify_regularity(lemma, lc2, FP_LC, cfg)
    assert rep.samples == 150
    assert rep.max_ratio <= 1.0, (lemma, rep.max_ratio, rep.worst_sample)
    assert all(rep.preconditions.values())
    assert rep.worst_residual <= 1e-10


def test_regularity_on_quadratic(quad1):
    rep = verify_regularity("mixing-pointwise", quad1, FP_Q,
                            SamplerConfig(samples=300, seed=5))
    assert rep.max_ratio <= 1.0
    # worst ratio approaches (a/b) / (3/(2T)) = 0.995/1.5
    assert rep.max_ratio == pytest.approx(0.995 / 1.5, rel=1e-6)


def test_negative_control_understated_curvature(lc2):
    dishonest = lc2.with_metadata(L=lc2.L / 2.0)
    rep = verify_regularity("mixing-pointwise", dishonest, FP_LC,
                            SamplerConfig(samples=64, seed=9))
    assert not rep.preconditions["curvature_metadata"]
    assert not rep.passed


def test_zero_samples_report(lc2):
    rep = verify_regularity("mixing-pointwise", lc2, FP_LC,
                            SamplerConfig(samples=0))
    assert rep.samples == 0 and rep.max_ratio == 0.0


def test_unknown_lemma(lc2):
    with pytest.raises(KeyError):
        verify_regularity("nonesuch", lc2, FP_LC)

import math

import numpy as np
import numpy.testing as npt
import pytest

from couplelab import (EHMC, ULA, UHMC_V, FlowParams, GaussianLaw, KernelSpec,
                       RngStream, chain_coefficients, gaussian_chain_law,
                       joint_chain_law, kernel_step, point_law, run_chain,
                       standard_law, stationary_law, synchronous_coupled_step)


def uhmc(p, T, h):
    return KernelSpec(UHMC_V, p, FlowParams(T, h))


def test_forced_noise_reduces_to_flows(quad1):
    spec = uhmc(quad1, 0.1, 0.1)
    npt.assert_allclose(kernel_step(spec, [1.0], noise=[0.0]), [0.995])
    ula = KernelSpec(ULA, quad1, eta=0.1)
    npt.assert_allclose(kernel_step(ula, [1.0], noise=[0.0]), [0.9])


def test_ehmc_output_law_from_point(quad1):
    # delta_x start maps to a Gaussian with mean x cos T and variance sin^2 T
    spec = KernelSpec(EHMC, quad1, FlowParams(0.7, 0.0))
    law = gaussian_chain_law(spec, point_law([2.0]), 1)
    npt.assert_allclose(law.mean, [2.0 * math.cos(0.7)], rtol=1e-14)
    npt.assert_allclose(law.cov, [math.sin(0.7) ** 2], rtol=1e-14)


def test_run_chain_contracts(quad1):
    spec = uhmc(quad1, 0.1, 0.1)
    path = run_chain(spec, [1.0], 0, RngStream(7))
    npt.assert_allclose(path, [[1.0]])
    p1 = run_chain(spec, [1.0], 25, RngStream(7, 3))
    p2 = run_chain(spec, [1.0], 25, RngStream(7, 3))
    npt.assert_allclose(p1, p2, atol=0)          # same stream, same path
    p3 = run_chain(spec, [1.0], 25, RngStream(7, 4))
    assert np.abs(p1[1:] - p3[1:]).max() > 0     # distinct streams differ


def test_long_run_variance_matches_chain_law(quad1):
    spec = uhmc(quad1, 0.1, 0.1)
    steps = 100_000
    path = run_chain(spec, [0.0], steps, RngStream(11))
    tail = path[steps // 2:, 0]
    est = float(np.mean(tail ** 2))
    a, b = chain_coefficients(spec)
    truth = float((b ** 2 / (1 - a ** 2))[0])
    amax = float(np.abs(a).max())
    n_eff = tail.size * (1 - amax ** 2) / (1 + amax ** 2)
    se = math.sqrt(2.0 / n_eff) * truth
    assert abs(est - truth) <= 3.0 * se


def test_synchronous_coupling(quad1, lc2, rng):
    spec = uhmc(quad1, 0.1, 0.1)
    x1, y1 = synchronous_coupled_step(spec, [0.4], [0.4], RngStream(3))
    npt.assert_allclose(x1, y1, atol=0)
    # on a quadratic target the shared noise cancels and the factor is |a|
    a, _ = chain_coefficients(spec)
    x1, y1 = synchronous_coupled_step(spec, [1.0], [-0.5], RngStream(3))
    npt.assert_allclose(abs(x1 - y1), 1.5 * abs(a), rtol=1e-13)

    # strongly log-concave target: every pair contracts at least as fast
    # as the per-step factor 1 - alpha T^2/10
    T, h = 0.18, 0.045
    spec2 = KernelSpec(UHMC_V, lc2, FlowParams(T, h))
    assert lc2.L * T * T <= 1.0 / 20.0
    X, Y = rng.standard_normal((2, 500, 2))
    noise = rng.standard_normal((500, 2))
    X1, Y1 = synchronous_coupled_step(spec2, X, Y, noise=noise)
    ratio = (np.linalg.norm(X1 - Y1, axis=-1)
             / np.linalg.norm(X - Y, axis=-1))
    assert ratio.max() <= 1.0 - lc2.alpha * T * T / 10.0


def test_chain_law_examples(quad1):
    spec = uhmc(quad1, 0.1, 0.1)
    law = gaussian_chain_law(spec, point_law([1.0]), 0)
    npt.assert_allclose(law.mean, [1.0])
    npt.assert_allclose(law.cov, [0.0])
    stat = stationary_law(spec)
    npt.assert_allclose(stat.cov, [1.002506265664165], rtol=1e-12)
    espec = KernelSpec(EHMC, quad1, FlowParams(0.7, 0.0))
    npt.assert_allclose(stationary_law(espec).cov, [1.0], rtol=1e-14)


def test_chain_law_matches_iterated_moments(quad2):
    spec = KernelSpec(UHMC_V, quad2, FlowParams(0.2, 0.05))
    a, b = chain_coefficients(spec)
    init = GaussianLaw([1.0, -2.0], [0.5, 3.0])
    mean, var = init.mean.copy(), init.cov.copy()
    for _ in range(7):
        mean = a * mean
        var = a ** 2 * var + b ** 2
    law = gaussian_chain_law(spec, init, 7)
    npt.assert_allclose(law.mean, mean, rtol=1e-13)
    npt.assert_allclose(law.cov, var, rtol=1e-13)


def test_stationary_law_is_fixed_point(quad2):
    spec = KernelSpec(UHMC_V, quad2, FlowParams(0.2, 0.05))
    stat = stationary_law(spec)
    one_more = gaussian_chain_law(spec, stat, 1)
    npt.assert_allclose(one_more.cov, stat.cov, atol=1e-12)
    npt.assert_allclose(one_more.mean, stat.mean, atol=1e-12)


def test_ehmc_leaves_standard_gaussian_invariant(quad1):
    spec = KernelSpec(EHMC, quad1, FlowParams(0.7, 0.0))
    out = gaussian_chain_law(spec, standard_law(1), 1)
    npt.assert_allclose(out.mean, [0.0], atol=0)
    npt.assert_allclose(out.cov, [1.0], rtol=1e-15)
    # and empirically within Monte Carlo error
    gen = RngStream(5).generator()
    x = gen.standard_normal((20000, 1))
    y = kernel_step(spec, x, noise=gen.standard_normal((20000, 1)))
    assert abs(float(np.mean(y ** 2)) - 1.0) <= 3.0 * math.sqrt(2.0 / 20000)


def test_ula_one_step_law(quad1):
    spec = KernelSpec(ULA, quad1, eta=0.1)
    law = gaussian_chain_law(spec, point_law([1.0]), 1)
    npt.assert_allclose(law.mean, [0.9], rtol=1e-15)
    npt.assert_allclose(law.cov, [0.2], rtol=1e-15)


def test_kernel_spec_validation(quad1):
    with pytest.raises(ValueError):
        KernelSpec(UHMC_V, quad1, FlowParams(2.5, 0.5))   # L T^2 too large
    with pytest.raises(ValueError):
        KernelSpec(ULA, quad1, eta=0.0)
    with pytest.raises(ValueError):
        KernelSpec(UHMC_V, quad1, FlowParams(0.5, 0.0))   # needs h > 0
    with pytest.raises(ValueError):
        KernelSpec("mala", quad1, FlowParams(0.5, 0.1))


def test_joint_chain_law_decorrelates(quad1):
    spec = uhmc(quad1, 0.2, 0.05)
    init = GaussianLaw([0.0], [2.0])
    var0, cov01, var1 = joint_chain_law(spec, init, 1)
    a, b = chain_coefficients(spec)
    npt.assert_allclose(cov01, a * 2.0, rtol=1e-14)
    npt.assert_allclose(var1, a ** 2 * 2.0 + b ** 2, rtol=1e-14)

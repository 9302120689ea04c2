import math

import numpy as np
import pytest
from scipy import integrate, stats

from classes.class_errors import DomainError
from conftest import make_spec
from tools import closure, model
from tools.comparison import builtin_experiment

T1 = 1.0  # lambda = 45 on [0, 2) for experiment 7


def gaussian_expectation(fn, z1, sigma1, split):
    density = stats.norm(loc=z1, scale=sigma1).pdf
    left, _ = integrate.quad(lambda x: fn(x) * density(x), -np.inf, split, epsabs=1e-14, epsrel=1e-13, limit=200)
    right, _ = integrate.quad(lambda x: fn(x) * density(x), split, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return left + right


def test_normal_primitives():
    assert closure.std_normal_cdf(0.0) == 0.5
    assert closure.std_normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-12)
    assert closure.std_normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-15)
    assert closure.normal_cdf(50, 50, 5) == 0.5
    assert closure.normal_pdf(50, 50, 5) == pytest.approx(closure.std_normal_pdf(0) / 5)


def test_g_examples(exp7):
    assert closure.g_eval(3, exp7, T1, (40, 0), 0.0) == 40
    assert closure.g_eval(3, exp7, T1, (50, 0), 5.0) == pytest.approx(50 - 5 / math.sqrt(2 * math.pi), rel=1e-12)
    assert closure.g_eval(5, exp7, T1, (50, 0), 5.0) == pytest.approx(5 / math.sqrt(2 * math.pi), rel=1e-12)
    assert closure.g_eval(5, exp7, T1, (45, 0), 0.0) == 0


def test_g_rejects_negative_sigma(exp7):
    with pytest.raises(DomainError):
        closure.g_eval(3, exp7, T1, (40, 0), -1.0)
    with pytest.raises(DomainError):
        closure.g_eval(6, exp7, T1, (40, 0), 1.0)


@pytest.mark.parametrize("sigma1", np.linspace(0.5, 20, 10))
def test_closure_matches_quadrature(exp7, sigma1):
    rates = exp7.rates_at(T1)
    n = rates.n
    for z1 in np.linspace(n - 3 * sigma1, n + 3 * sigma1, 20):
        served = gaussian_expectation(lambda x: min(x, n), z1, sigma1, n)
        excess = gaussian_expectation(lambda x: max(x - n, 0.0), z1, sigma1, n)
        g = closure.closed_rates(rates, z1, 0.0, sigma1)
        assert g[2] == pytest.approx(rates.mu1 * served, rel=1e-8)
        assert g[3] == pytest.approx(rates.beta * (1 - rates.p) * excess, rel=1e-8)
        assert g[4] == pytest.approx(rates.beta * rates.p * excess, rel=1e-8)


def test_drift_G_examples(exp7):
    np.testing.assert_allclose(closure.drift_G(exp7, T1, (50, 10), 5.0), (-4.99472, -0.00528), atol=1e-5)
    for z in [(10, 3), (50, 0), (70, 20)]:
        np.testing.assert_array_equal(closure.drift_G(exp7, T1, z, 0.0), model.drift_F(exp7, T1, z))
    empty = make_spec(lam=0.0)
    np.testing.assert_array_equal(closure.drift_G(empty, 0.0, (0, 0), 0.0), (0, 0))


def test_gradient_examples(exp7):
    assert closure.grad_A(exp7, T1, (0, 0), 3.0)[0, 0] == pytest.approx(-1.0)
    no_abandon = make_spec(lam=45, beta=0.0)
    assert closure.grad_A(no_abandon, T1, (200, 0), 3.0)[0, 0] == pytest.approx(0.0, abs=1e-12)
    A = closure.grad_A(exp7, T1, (50, 0), 4.0)
    assert A[0, 0] == pytest.approx(-1.5)
    assert A[0, 1] == 0.2 and A[1, 1] == -0.2
    assert A[1, 0] == pytest.approx(0.5)


def test_gradient_degenerate_is_indicator(exp7):
    np.testing.assert_array_equal(closure.grad_A(exp7, T1, (50, 3), 0.0), model.classic_gradient(exp7, T1, (50, 3)))
    np.testing.assert_array_equal(closure.grad_A(exp7, T1, (51, 3), 0.0), model.classic_gradient(exp7, T1, (51, 3)))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    specs = [builtin_experiment(i) for i in (1, 3, 7, 10)]
    for _ in range(100):
        spec = specs[rng.integers(len(specs))]
        t = rng.uniform(0, spec.horizon)
        n = spec.rates_at(t).n
        sigma1 = 10 ** rng.uniform(-3, math.log10(20))
        z = np.array([n + rng.uniform(-4, 4) * sigma1, rng.uniform(0, 40)])
        A = closure.grad_A(spec, t, z, sigma1)
        for j in range(2):
            # the step shrinks with the Gaussian width so truncation stays below tolerance
            h = min(1e-5 * max(1.0, abs(z[j])), 1e-3 * sigma1)
            up, down = z.copy(), z.copy()
            up[j] += h
            down[j] -= h
            fd = (closure.drift_G(spec, t, up, sigma1) - closure.drift_G(spec, t, down, sigma1)) / (2 * h)
            np.testing.assert_allclose(A[:, j], fd, rtol=1e-6, atol=1e-7)


def test_diffusion_B_examples():
    arrivals_only = make_spec(lam=45, x0=(0, 0))
    B = closure.diffusion_B(arrivals_only, 0.0, (0, 0), 0.0)
    np.testing.assert_allclose(B @ B.T, [[45, 0], [0, 0]])

    retrial_only = make_spec(lam=0.0, mu2=0.2, beta=0.0)
    B = closure.diffusion_B(retrial_only, 0.0, (0, 10), 0.0)
    np.testing.assert_allclose(B @ B.T, [[2, -2], [-2, 2]])


def test_diffusion_B_columns(exp7):
    ev = closure.closure_eval(exp7, T1, (50, 10), 5.0)
    for i in range(model.K):
        np.testing.assert_allclose(ev.B[:, i], model.TRANSITIONS[i] * math.sqrt(ev.g[i]))
    expected = sum(ev.g[i] * np.outer(model.TRANSITIONS[i], model.TRANSITIONS[i]) for i in range(model.K))
    np.testing.assert_allclose(ev.BBt, expected, rtol=1e-12)
    np.testing.assert_allclose(model.catalog_noise(ev.g), (expected[0, 0], expected[0, 1], expected[1, 1]))
    np.testing.assert_allclose(ev.drift, closure.drift_G(exp7, T1, (50, 10), 5.0))


def test_diffusion_B_clamps_negative_rates():
    # a wide Gaussian near 0 puts mass below zero, the closed service rate dips negative
    spec = make_spec(lam=1.0, n=50)
    g = closure.g_eval(3, spec, 0.0, (0.0, 0.0), 20.0)
    assert g < 0
    B = closure.diffusion_B(spec, 0.0, (0.0, 0.0), 20.0)
    assert np.all(np.isfinite(B))
    assert B[0, 2] == 0.0


def test_decomposition_identity(exp7):
    rates = exp7.rates_at(T1)
    for z1 in np.linspace(0, 120, 25):
        for sigma1 in (0.0, 0.5, 3.0, 20.0):
            g = closure.closed_rates(rates, z1, 0.0, sigma1)
            assert g[2] / rates.mu1 + g[4] / (rates.beta * rates.p) == pytest.approx(z1, abs=1e-9)


def test_linear_rates_unchanged(exp7):
    rng = np.random.default_rng(5)
    for _ in range(100):
        z = rng.uniform(0, 100, size=2)
        sigma1 = rng.uniform(0, 20)
        for i in (1, 2):
            assert closure.g_eval(i, exp7, T1, z, sigma1) == model.rate_f(i, exp7, T1, z)


def test_service_rate_smooth_across_servers(exp7):
    rates = exp7.rates_at(T1)
    h = 1e-4
    z1 = np.arange(50 - 50 * h, 50 + 50 * h, h)
    g3 = np.array([closure.closed_rates(rates, z, 0.0, 2.0)[2] for z in z1])
    assert np.max(np.abs(np.diff(g3))) <= 1.01 * rates.mu1 * h


def test_growth_and_lipschitz_bounds():
    rng = np.random.default_rng(8)
    sigma_max = 20.0
    for exp_id in (1, 7, 10):
        spec = builtin_experiment(exp_id)
        D = closure.closure_growth_constant(spec, sigma_max)
        M = model.lipschitz_constant(spec)
        for _ in range(10000 // 3):
            t = rng.uniform(0, spec.horizon)
            sigma1 = rng.uniform(0, sigma_max)
            x, y = rng.uniform(0, 300, size=(2, 2))
            rates = spec.rates_at(t)
            g = np.array(closure.closed_rates(rates, x[0], x[1], sigma1))
            assert np.all(np.abs(g) <= D * (1 + np.linalg.norm(x)) + 1e-9)
            gap = np.linalg.norm(np.subtract(closure.closed_drift(rates, x[0], x[1], sigma1),
                                             closure.closed_drift(rates, y[0], y[1], sigma1)))
            assert gap <= M * np.linalg.norm(x - y) + 1e-9

"""
Gaussian moment closure of the retrial catalog: each rate f_i is replaced by its
expectation g_i under X1 ~ Normal(z1, sigma1^2). Only the x1 marginal enters,
f_1 and f_2 are constant or linear so g_1 = f_1 and g_2 = f_2 at the mean.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from classes.class_errors import DomainError
from classes.class_profile import Rates
from resources import parameters
from tools import model

SIGMA_FLOOR = parameters.PARAMETERS['sigma_floor']
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal_cdf(u):
    return float(special.ndtr(u))


def std_normal_pdf(u):
    return _INV_SQRT_2PI * math.exp(-0.5 * u * u)


def normal_cdf(a, b, c):
    """Phi(a, b, c): probability that Normal(b, c^2) is at most a"""
    return std_normal_cdf((a - b) / c)


def normal_pdf(a, b, c):
    """phi(a, b, c): density of Normal(b, c^2) at a"""
    return std_normal_pdf((a - b) / c) / c


@dataclass(frozen=True)
class ClosureEval:
    g: np.ndarray   # closed rates g_1..g_5
    A: np.ndarray   # 2x2 drift gradient
    B: np.ndarray   # 2x5, column i is l_i sqrt(g_i)

    @property
    def BBt(self):
        return self.B @ self.B.T

    @property
    def drift(self):
        return model.TRANSITIONS.T @ self.g


def _check_sigma(sigma1):
    if sigma1 < 0 or math.isnan(sigma1):
        raise DomainError(f"sigma1 must be non-negative, got {sigma1}")


def _partial_moments(n, z1, sigma1):
    """
    (E[min(X, n)], E[(X - n)^+], P(X <= n)) for X ~ Normal(z1, sigma1^2).
    min(X, n) = X - (X - n)^+ = n - (n - X)^+; the identity with the smaller
    correction term is used so neither side cancels catastrophically.
    """
    u = (n - z1) / sigma1
    below = std_normal_cdf(u)
    above = std_normal_cdf(-u)
    density_term = sigma1 * std_normal_pdf(u)
    if z1 <= n:
        excess = (z1 - n) * above + density_term
        shortfall_min = z1 - excess
    else:
        shortfall = (n - z1) * below + density_term
        shortfall_min = n - shortfall
        excess = z1 - shortfall_min
    return shortfall_min, excess, below


def closed_rates(rates: Rates, z1, z2, sigma1):
    """g_1..g_5 with parameters frozen"""
    if sigma1 < SIGMA_FLOOR:
        return model.catalog_rates(rates, max(z1, 0.0), z2)
    served, excess, _ = _partial_moments(rates.n, z1, sigma1)
    return (
        rates.lam,
        rates.mu2 * z2,
        rates.mu1 * served,
        rates.beta * (1.0 - rates.p) * excess,
        rates.beta * rates.p * excess,
    )


def closed_drift(rates: Rates, z1, z2, sigma1):
    g1, g2, g3, g4, g5 = closed_rates(rates, z1, z2, sigma1)
    return g1 + g2 - g3 - g4 - g5, g4 - g2


def below_probability(rates: Rates, z1, sigma1):
    if sigma1 < SIGMA_FLOOR:
        return 1.0 if z1 <= rates.n else 0.0
    return std_normal_cdf((rates.n - z1) / sigma1)


def closed_gradient(rates: Rates, z1, sigma1):
    below = below_probability(rates, z1, sigma1)
    return (
        (-rates.mu1 * below - rates.beta * (1.0 - below), rates.mu2),
        (rates.beta * (1.0 - rates.p) * (1.0 - below), -rates.mu2),
    )


def g_eval(i, spec, t, z, sigma1):
    if i not in range(1, model.K + 1):
        raise DomainError(f"transition index must be in 1..{model.K}, got {i}")
    _check_sigma(sigma1)
    return float(closed_rates(spec.rates_at(t), float(z[0]), float(z[1]), sigma1)[i - 1])


def drift_G(spec, t, z, sigma1):
    _check_sigma(sigma1)
    return np.array(closed_drift(spec.rates_at(t), float(z[0]), float(z[1]), sigma1))


def grad_A(spec, t, z, sigma1):
    _check_sigma(sigma1)
    return np.array(closed_gradient(spec.rates_at(t), float(z[0]), sigma1))


def diffusion_B(spec, t, z, sigma1):
    _check_sigma(sigma1)
    g = np.array(closed_rates(spec.rates_at(t), float(z[0]), float(z[1]), sigma1))
    if np.any(g < 0):
        parameters.log.debug(f"negative closed rate clamped at t={t}: {g}")
    return model.TRANSITIONS.T * np.sqrt(np.maximum(g, 0.0))


def closure_eval(spec, t, z, sigma1):
    _check_sigma(sigma1)
    rates = spec.rates_at(t)
    z1, z2 = float(z[0]), float(z[1])
    g = np.array(closed_rates(rates, z1, z2, sigma1))
    A = np.array(closed_gradient(rates, z1, sigma1))
    B = model.TRANSITIONS.T * np.sqrt(np.maximum(g, 0.0))
    return ClosureEval(g=g, A=A, B=B)


def closure_growth_constant(spec, sigma_max):
    """D with |g_i(t, z)| <= D (1 + |z|) for every sigma1 <= sigma_max"""
    # E[(X - n)^+] <= E[X^+] <= |z1| + sigma1 / sqrt(2 pi)
    return max(
        max(s.rates.lam, s.rates.mu1 * s.rates.n, s.rates.mu2,
            (s.rates.mu1 + s.rates.beta) * (1.0 + _INV_SQRT_2PI * sigma_max))
        for s in spec.segments()
    )

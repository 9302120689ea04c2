"""
Transition catalog and rate functions of the multi-server queue with
abandonments and retrials. x1 counts customers at the service node, x2
customers waiting in the retrial orbit.
"""
import numpy as np

from classes.class_errors import DomainError
from classes.class_profile import Rates, TIME_TOLERANCE

# l_1 .. l_5: arrival, retrial, service, abandonment into the orbit, abandonment lost
TRANSITIONS = np.array([
    (1, 0),
    (1, -1),
    (-1, 0),
    (-1, 1),
    (-1, 0),
], dtype=int)
K = len(TRANSITIONS)


def eval_profile(profile, t, horizon):
    """value of a piecewise-constant profile at t, t must lie in [0, horizon]"""
    if t < 0 or t > horizon + TIME_TOLERANCE:
        raise DomainError(f"time {t} outside [0, {horizon}]")
    return profile.value_at(t)


def catalog_rates(rates: Rates, x1, x2):
    """all five f_i at one state, parameters already frozen"""
    excess = x1 - rates.n if x1 > rates.n else 0.0
    return (
        rates.lam,
        rates.mu2 * x2,
        rates.mu1 * min(x1, rates.n),
        rates.beta * (1.0 - rates.p) * excess,
        rates.beta * rates.p * excess,
    )


def catalog_drift(rates: Rates, x1, x2):
    f1, f2, f3, f4, f5 = catalog_rates(rates, x1, x2)
    return f1 + f2 - f3 - f4 - f5, f4 - f2


def catalog_gradient(rates: Rates, x1):
    """
    Drift gradient with one-sided indicators: the service branch holds for
    x1 <= n, the abandonment branch for x1 > n.
    """
    below = 1.0 if x1 <= rates.n else 0.0
    return (
        (-rates.mu1 * below - rates.beta * (1.0 - below), rates.mu2),
        (rates.beta * (1.0 - rates.p) * (1.0 - below), -rates.mu2),
    )


def _check_state(x):
    x1, x2 = float(x[0]), float(x[1])
    if x1 < 0 or x2 < 0:
        raise DomainError(f"state must be non-negative, got ({x1}, {x2})")
    return x1, x2


def rates_vector(spec, t, x):
    x1, x2 = _check_state(x)
    return np.array(catalog_rates(spec.rates_at(t), x1, x2))


def rate_f(i, spec, t, x):
    if i not in range(1, K + 1):
        raise DomainError(f"transition index must be in 1..{K}, got {i}")
    return float(rates_vector(spec, t, x)[i - 1])


def drift_F(spec, t, x):
    x1, x2 = _check_state(x)
    return np.array(catalog_drift(spec.rates_at(t), x1, x2))


def classic_gradient(spec, t, x):
    x1, _ = _check_state(x)
    return np.array(catalog_gradient(spec.rates_at(t), x1))


def growth_constant(spec):
    """C with f_i(t, x) <= C (1 + |x|) on [0, T]"""
    segments = spec.segments()
    return max(max(s.rates.lam, s.rates.mu1 * s.rates.n, s.rates.mu2, s.rates.beta) for s in segments)


def lipschitz_constant(spec):
    """M with |F(t, x) - F(t, y)| <= M |x - y| on [0, T]"""
    segments = spec.segments()
    return max(s.rates.mu1 + s.rates.beta + s.rates.mu2 for s in segments)


def catalog_noise(f):
    """upper triangle (11, 12, 22) of sum_i f_i l_i l_i', negative rates clamped to 0"""
    f1, f2, f3, f4, f5 = (v if v > 0.0 else 0.0 for v in f)
    return f1 + f2 + f3 + f4 + f5, -f2 - f4, f2 + f4

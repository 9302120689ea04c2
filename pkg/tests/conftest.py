import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from classes.class_profile import ModelSpec, TimeProfile
from tools.comparison import builtin_experiment


def make_spec(lam=0.0, mu1=1.0, mu2=0.2, beta=2.0, p=0.5, n=50, x0=(0, 0), horizon=20.0):
    as_profile = lambda v: v if isinstance(v, TimeProfile) else TimeProfile.constant(v)
    return ModelSpec(lam=as_profile(lam), mu1=as_profile(mu1), mu2=as_profile(mu2), beta=as_profile(beta),
                     p=as_profile(p), n=as_profile(n), x0=x0, horizon=horizon)


@pytest.fixture
def exp7():
    return builtin_experiment(7)


@pytest.fixture
def infinite_server():
    """M/M/inf surrogate: no abandonment and more servers than customers"""
    return make_spec(lam=40.0, mu1=1.0, mu2=0.2, beta=0.0, p=0.5, n=10**6, x0=(0, 0), horizon=10.0)


@pytest.fixture
def orbit_death():
    """empty service node, 20 customers in orbit, no arrivals and no abandonment"""
    return make_spec(lam=0.0, mu1=1.0, mu2=0.2, beta=0.0, p=0.5, n=50, x0=(0, 20), horizon=10.0)


@pytest.fixture
def empty_system():
    return make_spec(lam=0.0, x0=(0, 0), horizon=20.0)


@pytest.fixture
def exp7_rates():
    """lambda=45, mu1=1, mu2=0.2, beta=2, p=0.5, n=50 at t=1"""
    return builtin_experiment(7), 1.0

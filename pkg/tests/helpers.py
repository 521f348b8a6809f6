"""Shared random-parameter generators for the test suite."""

import math

from riskeygen.rates import covariance_summary
from riskeygen.scene import LinkBudget


def random_budget(rng, ris=True):
    """Link budget with log-uniform gains, unit noise and P = 1."""
    b = 10.0 ** rng.uniform(-2.0, 1.0, 6)
    if not ris:
        b[3:] = 0.0
    return LinkBudget(*b, wavelength=0.1, tx_power=1.0, noise_power=1.0)


def random_covariance(rng, rho=None):
    """``(cov, budget, frob_sq, rho)`` with estimation SNR between about -5 and 35 dB."""
    budget = random_budget(rng)
    n = int(rng.integers(1, 101))
    frob_sq = n * rng.uniform(1.0, 3.5)
    if rho is None:
        rho = rng.uniform(0.0, 0.99)
    rho_ab = budget.beta_ab + budget.beta_ar * budget.beta_rb * frob_sq
    sbar = rho_ab * 10.0 ** (-rng.uniform(-0.5, 3.5))
    return covariance_summary(budget, frob_sq, rho, sbar), budget, frob_sq, rho


def log_uniform(rng, lo, hi):
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))

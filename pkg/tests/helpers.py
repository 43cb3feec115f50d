"""Shared test utilities: random instances with valid invariants."""

import numpy as np

from taxkinetics import ModelConfig


def random_simplex(rng, n, m, floor=1e-6):
    """Strictly positive random state summing to 1."""
    x = rng.random((n, m)) + floor
    return x / x.sum()


def random_config(rng, n=None, m=None):
    """Random valid configuration with n in [2, 12] and m in [1, 4]."""
    n = int(rng.integers(2, 13)) if n is None else n
    m = int(rng.integers(1, 5)) if m is None else m
    gaps = rng.uniform(0.5, 10.0, size=n - 1)
    first = rng.uniform(0.1, 5.0)
    incomes = first + np.concatenate([[0.0], np.cumsum(gaps)])
    s = float(rng.uniform(0.01, 0.19) * gaps.min())
    theta = np.sort(rng.uniform(0.0, 1.0, size=m))[::-1]
    shares = rng.dirichlet(np.ones(m))
    if rng.random() < 0.5:
        lo, hi = np.sort(rng.uniform(0.0, 1.0, size=2))
        return ModelConfig(incomes=incomes, theta_ev=theta, sector_shares=shares,
                           exchange_amount=s, tau_min=float(lo), tau_max=float(hi))
    tau = np.sort(rng.uniform(0.0, 1.0, size=n))
    return ModelConfig(incomes=incomes, theta_ev=theta, sector_shares=shares,
                       exchange_amount=s, tax_rates=tau)


def random_profile(rng, n):
    """Random strictly positive class profile summing to 1."""
    u = rng.random(n) + 0.05
    return u / u.sum()

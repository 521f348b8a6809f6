"""Sample-based references for the closed forms in :mod:`riskeygen.rates`.

These never call the closed-form expressions; they only see simulated
estimates and their empirical second moments.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .channels import aggregate, complex_normal, correlation_factor, draw_block, random_phase_matrix
from .scene import LinkBudget, SpatialCorrelation


def empirical_covariance(*columns):
    """Hermitian sample covariance ``E[x x^H]`` of zero-mean complex columns."""
    x = np.stack([np.asarray(c).ravel() for c in columns])
    return (x @ x.conj().T) / x.shape[1]


def gaussian_mi(cov, split=1):
    """Mutual information (bits) between the first ``split`` and remaining
    components of a circular complex Gaussian vector with covariance ``cov``."""
    cov = np.asarray(cov)
    a = cov[:split, :split]
    b = cov[split:, split:]
    _, la = np.linalg.slogdet(a)
    _, lb = np.linalg.slogdet(b)
    _, lab = np.linalg.slogdet(cov)
    return (la + lb - lab) / math.log(2.0)


def simulate_estimates(rng, budget: LinkBudget, corr: SpatialCorrelation, sigma_bar_sq, trials, chunk=200_000):
    """Draw ``trials`` independent (Alice, Bob, Eve) estimate triples from the
    channel model with a fresh block and fresh random RIS phases per trial.

    Returns arrays ``(est_ba, est_ab, est_ae)``.
    """
    factor = correlation_factor(corr.matrix).factor
    out = [[], [], []]
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        blk = draw_block(rng, budget, corr, size=n, factor=factor)
        phases = random_phase_matrix(rng, corr.n, size=n)
        g_ab = aggregate(blk.h_ab, blk.h_ar, phases, blk.h_rb)
        g_ae = aggregate(blk.h_ae, blk.h_ar, phases, blk.h_re)
        out[0].append(g_ab + complex_normal(rng, n, sigma_bar_sq))
        out[1].append(g_ab + complex_normal(rng, n, sigma_bar_sq))
        out[2].append(g_ae + complex_normal(rng, n, sigma_bar_sq))
        done += n
    return tuple(np.concatenate(o) for o in out)


def simulate_covariance_estimates(rng, rho_ab, rho_ae, rho_cross, sigma_bar_sq, trials):
    """Draw estimate triples whose noiseless parts have the given second
    moments, bypassing the channel model."""
    c = np.array([[rho_ab, rho_cross], [rho_cross, rho_ae]])
    w, v = np.linalg.eigh(c)
    root = v * np.sqrt(np.clip(w, 0.0, None))
    g = root @ complex_normal(rng, (2, trials))
    noise = complex_normal(rng, (3, trials), sigma_bar_sq)
    return g[0] + noise[0], g[0] + noise[1], g[1] + noise[2]


def mi_key_rate(est_ba, est_ab, est_ae, t_switch):
    """Empirical ``(2/T_s) [I(ab; ba) - I(ab; ae)]`` and ``I(ab; ae)``, both
    from Gaussian entropies of the sample covariances."""
    i_ab = gaussian_mi(empirical_covariance(est_ab, est_ba))
    i_ae = gaussian_mi(empirical_covariance(est_ab, est_ae))
    return 2.0 / t_switch * (i_ab - i_ae), i_ae


def expected_log_rate_rayleigh(mean_snr):
    """``E[log2(1 + mean_snr X)]`` for ``X ~ Exp(1)`` by 1-D quadrature."""
    val, _ = integrate.quad(lambda x: math.log2(1.0 + mean_snr * x) * math.exp(-x), 0.0, np.inf, limit=200)
    return val


def bessel_j0_series(x, terms=80):
    """Power series of ``J0`` summed with math.fsum (accurate for |x| <= 12)."""
    x = float(x)
    q = -(x * x) / 4.0
    term = 1.0
    parts = [term]
    for k in range(1, terms):
        term *= q / (k * k)
        parts.append(term)
    return math.fsum(parts)


def cascade_power(rng, budget: LinkBudget, corr: SpatialCorrelation, trials, phases=None):
    """Empirical ``E|h_ar^H Phi h_rb|^2`` in units of ``beta_ar beta_rb``.

    With ``phases=None`` every trial draws fresh uniform phases (the
    phase-averaged moment, ``N`` in expectation). A fixed phase vector gives
    the phase-conditional moment ``tr(Phi R Phi^H R)``, which equals
    ``||R||_F^2`` at ``Phi = I``.
    """
    factor = correlation_factor(corr.matrix).factor
    blk = draw_block(rng, budget, corr, size=trials, factor=factor)
    if phases is None:
        phases = random_phase_matrix(rng, corr.n, size=trials)
    cascade = aggregate(0.0, blk.h_ar, phases, blk.h_rb)
    return float(np.mean(np.abs(cascade) ** 2)) / (budget.beta_ar * budget.beta_rb)

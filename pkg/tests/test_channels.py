import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskeygen.channels import (
    PhaseMatrix,
    aggregate,
    aligned_magnitude,
    aligned_phase_matrix,
    complex_normal,
    correlation_factor,
    draw_block,
    random_phase_matrix,
)
from riskeygen.errors import DomainError
from riskeygen.scene import LinkBudget, RisLayout, ScenarioConfig, SpatialCorrelation, build_ris_correlation


def cholesky_banachiewicz(a):
    """Textbook row-by-row Cholesky, pure Python."""
    n = len(a)
    L = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = math.fsum(L[i][k] * L[j][k] for k in range(j))
            if i == j:
                L[i][j] = math.sqrt(a[i][i] - s)
            else:
                L[i][j] = (a[i][j] - s) / L[j][j]
    return np.array(L)


def small_budget(**kw):
    base = dict(
        beta_ab=2.0, beta_ae=0.5, beta_be=1.5, beta_ar=0.8, beta_rb=1.2, beta_re=0.7,
        wavelength=0.1, tx_power=1.0, noise_power=0.1,
    )
    base.update(kw)
    return LinkBudget(**base)


def test_factor_matches_hand_cholesky():
    R = build_ris_correlation(RisLayout(4, 2, 0.04), 0.1).matrix
    F = correlation_factor(R).factor
    assert np.allclose(F, cholesky_banachiewicz(R.tolist()), atol=1e-12)


def test_factor_semidefinite_fallback():
    v = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]).T / math.sqrt(2)
    R = v @ v.T
    R = R / np.sqrt(np.outer(np.diag(R), np.diag(R)))  # rank 2, unit diagonal
    F = correlation_factor(R).factor
    assert np.allclose(F @ F.T, R, atol=1e-10)
    assert np.allclose(F, np.tril(F))


def test_factor_rejects_indefinite():
    with pytest.raises(DomainError):
        correlation_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_complex_normal_moments():
    rng = np.random.default_rng(1)
    z = complex_normal(rng, 400_000, 3.0)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(3.0, rel=0.01)
    assert abs(np.mean(z * z)) < 0.03  # circular: E[z^2] = 0


def test_draw_block_second_moments():
    rng = np.random.default_rng(7)
    corr = build_ris_correlation(RisLayout(3, 2, 0.03), 0.1, rho=0.6)
    b = small_budget()
    n = 200_000
    blk = draw_block(rng, b, corr, size=n)
    assert blk.h_ar.shape == (n, 6)
    assert np.mean(np.abs(blk.h_ab) ** 2) == pytest.approx(b.beta_ab, rel=0.015)
    assert np.mean(np.abs(blk.h_ae) ** 2) == pytest.approx(b.beta_ae, rel=0.015)
    cross = np.mean(blk.h_ab * np.conj(blk.h_ae))
    assert cross.real == pytest.approx(0.6 * math.sqrt(b.beta_ab * b.beta_ae), rel=0.03)
    cov_ar = blk.h_ar.T @ np.conj(blk.h_ar) / n
    assert np.allclose(cov_ar.real, b.beta_ar * corr.matrix, atol=0.02)
    cov_rbre = blk.h_rb.T @ np.conj(blk.h_re) / n
    assert np.allclose(cov_rbre.real, 0.6 * math.sqrt(b.beta_rb * b.beta_re) * corr.matrix, atol=0.02)
    # independent hops
    assert np.max(np.abs(blk.h_ar.T @ np.conj(blk.h_rb) / n)) < 0.02


def test_draw_block_ris_disabled():
    rng = np.random.default_rng(0)
    sc = ScenarioConfig(ris_enabled=False)
    blk = draw_block(rng, sc.budget(), sc.spatial_correlation(), size=5)
    assert blk.h_ar.shape == (5, 0)
    g = aggregate(blk.h_ab, blk.h_ar, random_phase_matrix(rng, 0, size=5), blk.h_rb)
    assert np.array_equal(g, blk.h_ab)


def test_phase_matrix():
    rng = np.random.default_rng(3)
    ph = random_phase_matrix(rng, 1000)
    assert np.all((ph.thetas >= 0) & (ph.thetas < 2 * np.pi))
    m = ph.as_matrix()
    assert np.allclose(np.abs(np.diag(m)), 1.0)
    assert np.count_nonzero(m - np.diag(np.diag(m))) == 0


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_aggregate_matches_matrix_form(n, seed):
    rng = np.random.default_rng(seed)
    hd = complex_normal(rng)
    hi = complex_normal(rng, n)
    ho = complex_normal(rng, n)
    ph = random_phase_matrix(rng, n)
    ref = hd + np.conj(hi) @ ph.as_matrix() @ ho
    assert aggregate(hd, hi, ph, ho) == pytest.approx(ref, abs=1e-12)


def test_aggregate_length_mismatch():
    with pytest.raises(DomainError):
        aggregate(0.0, np.ones(3), np.zeros(4), np.ones(3))


def test_aligned_phases_reach_bound():
    rng = np.random.default_rng(11)
    corr = SpatialCorrelation.identity(16)
    blk = draw_block(rng, small_budget(), corr, size=50)
    g = aggregate(blk.h_ab, blk.h_ar, aligned_phase_matrix(blk), blk.h_rb)
    assert np.allclose(np.abs(g), aligned_magnitude(blk), rtol=1e-12)
    # random phases never beat alignment
    for _ in range(20):
        gr = aggregate(blk.h_ab, blk.h_ar, random_phase_matrix(rng, 16, size=50), blk.h_rb)
        assert np.all(np.abs(gr) <= aligned_magnitude(blk) + 1e-12)


def test_aggregate_variance_phase_averaged():
    # fresh uniform phases per draw: E|g|^2 = beta_ab + beta_ar beta_rb N
    # whatever R is; ||R||_F^2 appears only for a fixed phase vector
    rng = np.random.default_rng(5)
    corr = build_ris_correlation(RisLayout(4, 1, 0.025), 0.1)
    b = small_budget()
    n = 200_000
    blk = draw_block(rng, b, corr, size=n)
    g = aggregate(blk.h_ab, blk.h_ar, random_phase_matrix(rng, 4, size=n), blk.h_rb)
    assert np.mean(np.abs(g) ** 2) == pytest.approx(b.beta_ab + b.beta_ar * b.beta_rb * 4, rel=0.02)


def test_phase_matrix_batch_as_matrix_rejected():
    with pytest.raises(DomainError):
        PhaseMatrix(np.zeros((2, 3))).as_matrix()


def test_aggregate_is_near_gaussian_at_n100():
    from scipy.stats import kurtosis

    rng = np.random.default_rng(21)
    sc = ScenarioConfig()
    corr = sc.spatial_correlation()
    b = sc.budget()
    blk = draw_block(rng, b, corr, size=100_000)
    g = aggregate(blk.h_ab, blk.h_ar, random_phase_matrix(rng, corr.n, size=100_000), blk.h_rb)
    for part in (g.real, g.imag):
        assert 2.8 <= kurtosis(part, fisher=False) <= 3.2


def test_draws_are_deterministic():
    sc = ScenarioConfig()
    a = draw_block(np.random.default_rng(99), sc.budget(), sc.spatial_correlation(), size=3)
    b = draw_block(np.random.default_rng(99), sc.budget(), sc.spatial_correlation(), size=3)
    for name in ("h_ab", "h_ae", "h_be", "h_ar", "h_rb", "h_re"):
        assert np.array_equal(getattr(a, name), getattr(b, name))


def test_reciprocal_channels_identical_before_noise():
    from riskeygen.keygen import ProtocolParams, run_keygen

    rec, _ = run_keygen(np.random.default_rng(0), ScenarioConfig(), ProtocolParams(t_key=10, n_blocks=5))
    assert rec.g_ba is rec.g_ab or np.array_equal(rec.g_ba, rec.g_ab)


def test_cascade_moment_phase_averaged_vs_conditional():
    from riskeygen.oracles import cascade_power

    sc = ScenarioConfig()
    corr = sc.spatial_correlation()
    rng = np.random.default_rng(8)
    averaged = cascade_power(rng, sc.budget(), corr, 40_000)
    fixed = cascade_power(rng, sc.budget(), corr, 40_000, phases=np.zeros(corr.n))
    # random phases: N; constant phases: ||R||_F^2
    assert averaged == pytest.approx(corr.n, rel=0.03)
    assert fixed == pytest.approx(corr.frob_sq, rel=0.05)

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskeygen.errors import ConfigError, DomainError
from riskeygen.oracles import bessel_j0_series
from riskeygen.scene import (
    PathLossSpec,
    Position,
    RisLayout,
    ScenarioConfig,
    SpatialCorrelation,
    build_ris_correlation,
    dbm_to_watts,
    frobenius_norm_sq,
    link_budget_from_geometry,
    path_loss_factor,
    pearson_correlation,
)

LAM = 0.1  # any wavelength works for ratio-based checks

# frozen from 40-digit mpmath evaluations
PL_30M = 3.792844128189058e-09
J0_PI_SQ = 0.09256330265762037
J0_PI5_SQ = 0.8166965394777461


def test_path_loss_unit_distance():
    assert path_loss_factor(1.0, 3.67, 30.0) == pytest.approx(1e-3, rel=1e-15)
    assert path_loss_factor(1.0, 2.2, 0.0) == 1.0


def test_path_loss_30m_matches_high_precision():
    mp.mp.dps = 30
    ref = float(mp.mpf("1e-3") / mp.mpf(30) ** mp.mpf("3.67"))
    assert ref == pytest.approx(PL_30M, rel=1e-15)
    assert path_loss_factor(30.0, 3.67, 30.0) == pytest.approx(PL_30M, rel=1e-13)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_loss_rejects_nonpositive(d):
    with pytest.raises(DomainError):
        path_loss_factor(d, 2.0, 30.0)


def test_path_loss_monotone():
    d = np.linspace(1.01, 200, 400)
    assert np.all(np.diff(path_loss_factor(d, 2.2, 30.0)) < 0)
    alphas = np.linspace(0, 5, 50)
    vals = [path_loss_factor(5.0, a, 30.0) for a in alphas]
    assert np.all(np.diff(vals) < 0)


def test_pearson_values():
    assert pearson_correlation(0.0, LAM) == 1.0
    assert pearson_correlation(LAM / 2, LAM) == pytest.approx(J0_PI_SQ, abs=1e-12)
    assert pearson_correlation(LAM / 10, LAM) == pytest.approx(J0_PI5_SQ, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.404825557695773, 5.0, 9.5, 11.9])
def test_pearson_against_series(x):
    d = x * LAM / (2 * math.pi)
    assert pearson_correlation(d, LAM) == pytest.approx(bessel_j0_series(x) ** 2, abs=1e-10)


def test_pearson_envelope():
    d = np.linspace(0.6 * LAM, 20 * LAM, 4000)
    assert np.all(pearson_correlation(d, LAM) <= 0.2)


def test_sinc_correlation_entries():
    lam = 0.1
    R = build_ris_correlation(RisLayout(2, 1, lam / 4), lam).matrix
    assert R[0, 0] == 1.0
    assert R[0, 1] == pytest.approx(2 / math.pi, abs=1e-14)
    R2 = build_ris_correlation(RisLayout(2, 1, lam / 2), lam).matrix
    assert abs(R2[0, 1]) < 1e-15


def test_frobenius_examples():
    assert frobenius_norm_sq(np.eye(7)) == 7
    assert frobenius_norm_sq(np.zeros((3, 3))) == 0
    m = np.array([[1, 2 / math.pi], [2 / math.pi, 1]])
    assert frobenius_norm_sq(m) == pytest.approx(2.8105694691387022, rel=1e-14)


def test_table_layout_invariants():
    sc = ScenarioConfig()
    corr = sc.spatial_correlation()
    R = corr.matrix
    assert R.shape == (100, 100)
    assert np.array_equal(R, R.T)
    assert np.all(np.diag(R) == 1.0)
    assert np.linalg.eigvalsh(R).min() >= -1e-9
    assert corr.frob_sq > 100


def test_layout_is_row_major_and_centered():
    lay = RisLayout(3, 2, 0.5, Position(1.0, 2.0, 3.0))
    u = lay.element_coordinates()
    assert np.allclose(u.mean(axis=0), [1.0, 2.0, 3.0])
    assert np.allclose(u[1] - u[0], [0, 0.5, 0])
    assert np.allclose(u[3] - u[0], [0, 0, 0.5])
    assert len(lay.element_positions) == 6


@settings(max_examples=40, deadline=None)
@given(
    cols=st.integers(1, 8),
    rows=st.integers(1, 6),
    spacing_wl=st.floats(0.05, 2.0),
)
def test_correlation_properties(cols, rows, spacing_wl):
    corr = build_ris_correlation(RisLayout(cols, rows, spacing_wl * LAM), LAM)
    R = corr.matrix
    n = cols * rows
    assert np.allclose(R, R.T)
    assert np.all(np.diag(R) == 1.0)
    assert np.linalg.eigvalsh(R).min() >= -1e-9
    off = R[~np.eye(n, dtype=bool)]
    assert corr.frob_sq >= n - 1e-9
    assert corr.frob_sq == pytest.approx(n + np.sum(off**2), rel=1e-12)


def test_identity_correlation_frob_equals_n():
    c = SpatialCorrelation.identity(12, 0.3)
    assert c.frob_sq == 12 and c.rho == 0.3


def test_correlation_matrix_is_read_only():
    c = SpatialCorrelation.identity(3)
    with pytest.raises(ValueError):
        c.matrix[0, 0] = 2.0


def test_table_link_budget():
    b = ScenarioConfig().budget()
    assert b.beta_ab == pytest.approx(PL_30M, rel=1e-13)
    assert b.tx_power == pytest.approx(0.31622776601683794, rel=1e-15)
    assert b.noise_power == pytest.approx(2.5118864315095802e-13, rel=1e-14)
    assert dbm_to_watts(25) == pytest.approx(0.3162, abs=1e-4)
    # RIS hop Alice -> (0,3,1.5) is 3 m
    assert b.beta_ar == pytest.approx(1e-3 / 3**2.2, rel=1e-13)
    assert b.beta_rb == pytest.approx(1e-3 / math.hypot(30, 3) ** 2.2, rel=1e-13)


def test_antenna_gain_modes():
    sc = ScenarioConfig()
    off = sc.budget()
    g = 10 ** 0.5
    ris = sc.replace(antenna_gain_mode="ris_links").budget()
    assert ris.beta_ab == off.beta_ab
    assert ris.beta_ar == pytest.approx(off.beta_ar * g)
    assert ris.beta_rb == pytest.approx(off.beta_rb * g)
    both = sc.replace(antenna_gain_mode="ap_and_ris").budget()
    assert both.beta_ab == pytest.approx(off.beta_ab * g)
    assert both.beta_ar == pytest.approx(off.beta_ar * g * g)
    assert both.beta_re == pytest.approx(off.beta_re * g)


def test_penetration_loss_on_direct_links_only():
    pl = PathLossSpec(penetration_loss_db=20.0)
    a = link_budget_from_geometry(
        Position(0, 0), Position(30, 0), Position(31, 0), RisLayout(2, 2, 0.01, Position(25, 5)), pl, 2.5e9, 20, -90
    )
    b = link_budget_from_geometry(
        Position(0, 0), Position(30, 0), Position(31, 0), RisLayout(2, 2, 0.01, Position(25, 5)), PathLossSpec(), 2.5e9, 20, -90
    )
    assert a.beta_ab == pytest.approx(b.beta_ab / 100)
    assert a.beta_ae == pytest.approx(b.beta_ae / 100)
    assert a.beta_be == b.beta_be and a.beta_ar == b.beta_ar


def test_overlapping_nodes_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig(eve=Position(30.0, 0.0, 1.5)).budget()


def test_coincident_elements_rejected():
    with pytest.raises(ConfigError):
        RisLayout(2, 2, 0.0)


def test_ris_disabled():
    sc = ScenarioConfig(ris_enabled=False)
    b = sc.budget()
    assert b.beta_ar == b.beta_rb == b.beta_re == 0.0
    assert sc.spatial_correlation().n == 0


def test_rho_modes():
    sc = ScenarioConfig(eve=Position(30.01, 0.0, 1.5), rho=0.9)
    assert sc.spatial_correlation().rho == 0.9
    derived = sc.replace(rho_mode="derived")
    # lambda = 0.0999 m at 3 GHz, so 1 cm is just over lambda/10
    assert derived.rho_effective == pytest.approx(pearson_correlation(0.01, sc.wavelength))
    assert 0.8 < derived.rho_effective < 0.82


def test_invalid_rho():
    with pytest.raises(ConfigError):
        ScenarioConfig(rho=1.2)
    with pytest.raises(ConfigError):
        SpatialCorrelation(np.eye(2), -0.1)

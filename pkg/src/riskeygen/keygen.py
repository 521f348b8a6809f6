"""Ping-pong key generation with random RIS switching.

Within each coherence block the RIS redraws its phases every ``T_s``
symbols, giving ``L = T_k / T_s`` end-to-end channel estimates per block.
Key ``l`` collects the ``l``-th estimate of ``F`` consecutive blocks, so its
inputs are i.i.d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .channels import aggregate, complex_normal, correlation_factor, draw_block, random_phase_matrix
from .errors import ConfigError, DomainError
from .scene import ScenarioConfig

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ProtocolParams:
    t_total: int = 1000
    t_key: int = 200
    t_switch: int = 2
    q_levels: int = 4
    n_blocks: int = 100

    def __post_init__(self):
        ts, tk = self.t_switch, self.t_key
        if ts < 2 or ts % 2:
            raise ConfigError(f"t_switch must be even and >= 2, got {ts}")
        if tk < ts or tk % ts:
            raise ConfigError(f"t_key ({tk}) must be a positive multiple of t_switch ({ts})")
        if tk > self.t_total:
            raise ConfigError(f"t_key ({tk}) exceeds t_total ({self.t_total})")
        q = self.q_levels
        if q < 2 or q & (q - 1):
            raise ConfigError(f"q_levels must be a power of two >= 2, got {q}")
        if self.n_blocks < 1:
            raise ConfigError("n_blocks must be >= 1")

    @property
    def n_intervals(self) -> int:
        """``L``, estimates per block."""
        return self.t_key // self.t_switch

    @property
    def bits_per_estimate(self) -> int:
        return int(math.log2(self.q_levels))

    def noise_variance(self, tx_power, noise_power) -> float:
        return estimation_noise_variance(self.t_switch, tx_power, noise_power)

    def replace(self, **changes) -> ProtocolParams:
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class EstimateRecord:
    """Noisy and noiseless channel values, each of shape ``(F, L)``."""

    est_ba: np.ndarray
    est_ab: np.ndarray
    est_ae: np.ndarray
    est_be: np.ndarray
    g_ab: np.ndarray
    g_ae: np.ndarray
    g_be: np.ndarray
    sigma_bar_sq: float

    @property
    def g_ba(self) -> np.ndarray:
        # reciprocity: the reverse end-to-end channel is the same value
        return self.g_ab


@dataclass(frozen=True)
class KeyMaterial:
    """Per-key bit strings, shape ``(L, F * log2 Q)`` of uint8, plus the
    quantized levels ``(L, F)`` they were labeled from."""

    bits_alice: np.ndarray
    bits_bob: np.ndarray
    bits_eve: np.ndarray
    levels_alice: np.ndarray
    levels_bob: np.ndarray
    levels_eve: np.ndarray

    @property
    def n_keys(self) -> int:
        return self.bits_alice.shape[0]

    @property
    def key_bits(self) -> int:
        return self.bits_alice.shape[1]


def estimation_noise_variance(t_switch, p, sigma2):
    """Least-squares estimation noise ``2 sigma^2 / (T_s P)``."""
    if t_switch < 2:
        raise DomainError("t_switch must be >= 2")
    if p <= 0:
        raise DomainError("transmit power must be positive")
    return 2.0 * sigma2 / (t_switch * p)


def ls_estimate(g, rng, sigma_bar_sq):
    """Add ``CN(0, sigma_bar_sq)`` estimation noise to ``g``."""
    if sigma_bar_sq < 0:
        raise DomainError("noise variance must be non-negative")
    g = np.asarray(g)
    if sigma_bar_sq == 0:
        return g.copy() if g.ndim else complex(g)
    return g + complex_normal(rng, g.shape or None, sigma_bar_sq)


def ls_estimate_from_pilots(g, rng, t_switch, p, sigma2):
    """Per-symbol path: send ``T_s/2`` pilots of power ``P`` and apply LS.

    Statistically identical to :func:`ls_estimate` at
    ``estimation_noise_variance(t_switch, p, sigma2)``.
    """
    g = np.asarray(g)
    m = t_switch // 2
    x = np.full(m, np.sqrt(p), dtype=complex)
    y = g[..., None] * x + complex_normal(rng, g.shape + (m,), sigma2)
    return (y @ np.conj(x)) / np.vdot(x, x).real


def quantize_phase(g, q_levels):
    """Map the phase of ``g`` to a level in ``1..Q``.

    The phase is wrapped to [0, 2pi) and level ``q`` covers
    ``[2pi(q-1)/Q, 2pi q/Q)``.
    """
    g = np.asarray(g)
    if np.any(g == 0):
        raise DomainError("phase of a zero channel is undefined")
    phase = np.mod(np.angle(g), TWO_PI)
    q = np.floor(phase * (q_levels / TWO_PI)).astype(np.int64)
    # np.mod can return exactly 2pi for tiny negative angles
    q = np.minimum(q, q_levels - 1) + 1
    return int(q) if q.ndim == 0 else q


def gray_code(level_index):
    """Gray code of a zero-based level index."""
    level_index = np.asarray(level_index)
    return level_index ^ (level_index >> 1)


def level_bits(levels, q_levels, labeling="gray"):
    """Expand levels ``1..Q`` along the last axis into ``log2 Q`` bits each (MSB first)."""
    k = int(math.log2(q_levels))
    idx = np.asarray(levels) - 1
    if labeling == "gray":
        idx = gray_code(idx)
    elif labeling != "binary":
        raise ConfigError(f"unknown labeling {labeling!r}")
    shifts = np.arange(k - 1, -1, -1)
    bits = (idx[..., None] >> shifts) & 1
    return bits.reshape(idx.shape[:-1] + (idx.shape[-1] * k,)).astype(np.uint8)


def key_length(n_blocks, q_levels):
    return n_blocks * int(math.log2(q_levels))


def empirical_kmr(a, b):
    """Fraction of positions where two equal-length bit strings differ."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.size != b.size:
        raise DomainError(f"bit strings differ in length ({a.size} vs {b.size})")
    if a.size == 0:
        raise DomainError("empty bit strings")
    return float(np.count_nonzero(a != b)) / a.size


def symbol_mismatch(levels_a, levels_b):
    """Fraction of quantized estimates that land in different sectors."""
    return empirical_kmr(levels_a, levels_b)


def match_prob_approx(q_levels, snr):
    """High-SNR approximation of the probability that two noisy phase
    estimates fall in the same of ``Q`` sectors, with ``sigma~^2 = 1/snr``.
    """
    if q_levels < 2:
        raise DomainError("Q must be >= 2")
    if snr <= 0:
        raise DomainError("snr must be positive")
    s = 1.0 / snr
    edge = math.tan(math.pi / q_levels) ** 2
    if q_levels == 2:
        # tan(pi/2) is infinite: the boundary term tends to 1/2
        boundary = 0.5
    else:
        boundary = edge / (2.0 * (edge + s))

    def integrand(theta):
        t = math.tan(theta) ** 2
        return t / (t + s)

    # the integrand has a sharp knee near theta ~ sqrt(s); hint it to quad
    points = [min(math.sqrt(s), math.pi / q_levels / 2)]
    integral, _ = quad(integrand, 0.0, math.pi / q_levels, epsabs=1e-11, epsrel=1e-11, limit=200, points=points)
    return boundary + q_levels / TWO_PI * integral


def run_keygen(rng, scenario: ScenarioConfig, params: ProtocolParams, labeling="gray", per_symbol=False):
    """Simulate ``F`` blocks of the protocol and extract ``L`` keys.

    Returns ``(EstimateRecord, KeyMaterial)``. Alice keys from her estimate
    of the Bob->Alice channel, Bob from Alice->Bob, and Eve quantizes her
    estimate of Alice->Eve with the same rule.
    """
    budget = scenario.budget()
    corr = scenario.spatial_correlation()
    factor = correlation_factor(corr.matrix).factor
    f_blocks, n_int = params.n_blocks, params.n_intervals
    sigma_bar_sq = params.noise_variance(budget.tx_power, budget.noise_power)

    block = draw_block(rng, budget, corr, size=f_blocks, factor=factor)
    phases = random_phase_matrix(rng, corr.n, size=(f_blocks, n_int))

    def end_to_end(direct, h_in, h_out):
        return aggregate(direct[:, None], h_in[:, None, :], phases, h_out[:, None, :])

    g_ab = end_to_end(block.h_ab, block.h_ar, block.h_rb)
    g_ae = end_to_end(block.h_ae, block.h_ar, block.h_re)
    # Bob -> RIS -> Eve uses h_br = h_rb by reciprocity
    g_be = end_to_end(block.h_be, block.h_rb, block.h_re)

    if per_symbol:
        def observe(g):
            return ls_estimate_from_pilots(g, rng, params.t_switch, budget.tx_power, budget.noise_power)
    else:
        def observe(g):
            return ls_estimate(g, rng, sigma_bar_sq)

    est_ba = observe(g_ab)
    est_ab = observe(g_ab)
    est_ae = observe(g_ae)
    est_be = observe(g_be)

    record = EstimateRecord(est_ba, est_ab, est_ae, est_be, g_ab, g_ae, g_be, sigma_bar_sq)

    q = params.q_levels
    # keys run over blocks: transpose (F, L) -> (L, F)
    lv_a = quantize_phase(est_ba, q).T
    lv_b = quantize_phase(est_ab, q).T
    lv_e = quantize_phase(est_ae, q).T
    keys = KeyMaterial(
        level_bits(lv_a, q, labeling),
        level_bits(lv_b, q, labeling),
        level_bits(lv_e, q, labeling),
        lv_a,
        lv_b,
        lv_e,
    )
    return record, keys

"""Correlated Rayleigh channel draws, RIS phase configurations, aggregation.

Every drawing function accepts an optional ``size`` (int or tuple) that
prepends batch dimensions, so Monte Carlo loops stay vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .scene import LinkBudget, SpatialCorrelation

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ChannelBlock:
    """One coherence block. Reciprocity makes the reverse links redundant.

    Scalars have shape ``batch``; vectors have shape ``batch + (N,)``.
    """

    h_ab: np.ndarray
    h_ae: np.ndarray
    h_be: np.ndarray
    h_ar: np.ndarray
    h_rb: np.ndarray
    h_re: np.ndarray

    @property
    def n_elements(self) -> int:
        return self.h_ar.shape[-1]


@dataclass(frozen=True)
class PhaseMatrix:
    """Diagonal RIS reflection matrix stored as its phases in [0, 2pi)."""

    thetas: np.ndarray

    @property
    def n(self) -> int:
        return self.thetas.shape[-1]

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.thetas)

    def as_matrix(self) -> np.ndarray:
        if self.thetas.ndim != 1:
            raise DomainError("as_matrix only supports a single configuration")
        return np.diag(self.diagonal())


@dataclass(frozen=True)
class CorrelationFactor:
    factor: np.ndarray


def correlation_factor(R, tol: float = 1e-6) -> CorrelationFactor:
    """Lower-triangular ``F`` with ``F @ F.T == R``.

    Uses Cholesky when ``R`` is positive definite. Semidefinite matrices go
    through an eigenvalue-clipped square root followed by a QR step, which
    keeps the factor triangular.
    """
    R = np.asarray(R, dtype=float)
    n = R.shape[0]
    if n == 0:
        return CorrelationFactor(np.zeros((0, 0)))
    if not np.allclose(R, R.T, atol=1e-12):
        raise DomainError("correlation matrix is not symmetric")
    try:
        return CorrelationFactor(np.linalg.cholesky(R))
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh(R)
    if w.min() < -tol:
        raise DomainError(f"correlation matrix has eigenvalue {w.min():.3g} < -{tol}")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    _, upper = np.linalg.qr(root.T)
    lower = upper.T
    signs = np.where(np.diag(lower) < 0, -1.0, 1.0)
    return CorrelationFactor(lower * signs)


def complex_normal(rng, size=None, variance=1.0):
    """Circularly symmetric ``CN(0, variance)`` samples."""
    scale = np.sqrt(np.asarray(variance) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def _batch(size):
    if size is None:
        return ()
    return (size,) if np.isscalar(size) else tuple(size)


def draw_block(rng, budget: LinkBudget, corr: SpatialCorrelation, size=None, factor=None) -> ChannelBlock:
    """Draw one (or a batch of) coherence-block channel realizations.

    Eve's channels are built from Bob's so that the direct and per-element
    RIS cross-covariances equal ``rho`` times the geometric mean power, with
    the RIS part carrying ``R`` as well.
    """
    batch = _batch(size)
    n = corr.n
    if factor is None:
        factor = correlation_factor(corr.matrix).factor
    rho = corr.rho
    resid = np.sqrt(max(0.0, 1.0 - rho * rho))

    w = complex_normal(rng, batch + (3,))
    h_ab = np.sqrt(budget.beta_ab) * w[..., 0]
    h_ae = np.sqrt(budget.beta_ae) * (rho * w[..., 0] + resid * w[..., 1])
    h_be = np.sqrt(budget.beta_be) * w[..., 2]

    # white vectors -> correlated via the factor (applied on the last axis)
    white = complex_normal(rng, batch + (3, n))
    if n:
        colored = white @ factor.T
    else:
        colored = white
    h_ar = np.sqrt(budget.beta_ar) * colored[..., 0, :]
    h_rb = np.sqrt(budget.beta_rb) * colored[..., 1, :]
    h_re = np.sqrt(budget.beta_re) * (rho * colored[..., 1, :] + resid * colored[..., 2, :])
    return ChannelBlock(h_ab, h_ae, h_be, h_ar, h_rb, h_re)


def random_phase_matrix(rng, n: int, size=None) -> PhaseMatrix:
    if n < 0:
        raise DomainError("number of RIS elements must be non-negative")
    return PhaseMatrix(rng.uniform(0.0, TWO_PI, _batch(size) + (n,)))


def aggregate(h_direct, h_in, phases, h_out):
    """End-to-end channel ``h_direct + h_in^H diag(e^{j theta}) h_out``.

    ``phases`` may be a :class:`PhaseMatrix` or an array of phases; all
    arguments broadcast against each other on the leading axes.
    """
    thetas = phases.thetas if isinstance(phases, PhaseMatrix) else np.asarray(phases)
    h_in = np.asarray(h_in)
    h_out = np.asarray(h_out)
    if not (h_in.shape[-1] == h_out.shape[-1] == thetas.shape[-1]):
        raise DomainError("RIS vector lengths differ")
    cascade = np.sum(np.conj(h_in) * np.exp(1j * thetas) * h_out, axis=-1)
    return h_direct + cascade


def aligned_phase_matrix(block: ChannelBlock) -> PhaseMatrix:
    """Phases that co-phase every reflected path with the direct link.

    A zero-magnitude channel contributes phase 0 (``np.angle(0) == 0``).
    """
    theta = np.angle(block.h_ar) - np.angle(block.h_rb) + np.angle(block.h_ab)[..., None]
    return PhaseMatrix(np.mod(theta, TWO_PI))


def aligned_magnitude(block: ChannelBlock):
    """``|h_ab| + sum_n |h_ar,n| |h_rb,n|``, the magnitude reached by alignment."""
    return np.abs(block.h_ab) + np.sum(np.abs(block.h_ar) * np.abs(block.h_rb), axis=-1)

"""Physical scenario: geometry, link budget, RIS layout and spatial correlation.

All quantities are SI (meters, watts, hertz) unless the name says ``_db`` or
``_dbm``. Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .errors import ConfigError, DomainError

SPEED_OF_LIGHT = 299_792_458.0

ANTENNA_GAIN_MODES = ("off", "ris_links", "ap_and_ris")
CORRELATION_MODELS = ("sinc", "identity")
RHO_MODES = ("declared", "derived")


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ConfigError(f"non-finite coordinate in {self}")

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    def distance(self, other: Position) -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class RisLayout:
    """Uniform planar array in the y-z plane, centered on ``origin``.

    Elements are indexed row-major: element ``n = r * cols + c`` sits at
    ``origin + ((c - (cols-1)/2) * spacing, (r - (rows-1)/2) * spacing)`` in
    (y, z).
    """

    cols: int
    rows: int
    spacing: float
    origin: Position = Position(0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise ConfigError("RIS needs at least one row and one column")
        if not self.spacing > 0:
            raise ConfigError("RIS element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.cols * self.rows

    def element_coordinates(self) -> np.ndarray:
        """Return element positions as an ``(N, 3)`` array."""
        idx = np.arange(self.n_elements)
        r, c = np.divmod(idx, self.cols)
        coords = np.empty((self.n_elements, 3))
        coords[:, 0] = self.origin.x
        coords[:, 1] = self.origin.y + (c - (self.cols - 1) / 2) * self.spacing
        coords[:, 2] = self.origin.z + (r - (self.rows - 1) / 2) * self.spacing
        return coords

    @property
    def element_positions(self) -> list[Position]:
        return [Position(*p) for p in self.element_coordinates()]


@dataclass(frozen=True)
class PathLossSpec:
    fixed_loss_db: float = 30.0
    exponent_ris: float = 2.2
    exponent_direct: float = 3.67
    antenna_gain_db: float = 5.0
    penetration_loss_db: float = 0.0

    def __post_init__(self):
        if self.exponent_ris < 0 or self.exponent_direct < 0:
            raise ConfigError("path-loss exponents must be non-negative")
        if self.fixed_loss_db < 0:
            raise ConfigError("fixed loss must be non-negative")


@dataclass(frozen=True)
class LinkBudget:
    """Large-scale power gains of every link plus transmit and noise power.

    A RIS gain of exactly zero means the surface is disabled.
    """

    beta_ab: float
    beta_ae: float
    beta_be: float
    beta_ar: float
    beta_rb: float
    beta_re: float
    wavelength: float
    tx_power: float
    noise_power: float

    def __post_init__(self):
        for name in ("beta_ab", "beta_ae", "beta_be", "beta_ar", "beta_rb", "beta_re"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be non-negative")
        if not (self.tx_power > 0 and self.noise_power > 0 and self.wavelength > 0):
            raise ConfigError("tx power, noise power and wavelength must be positive")

    @property
    def snr(self) -> float:
        return self.tx_power / self.noise_power

    def without_ris(self) -> LinkBudget:
        return dataclasses.replace(self, beta_ar=0.0, beta_rb=0.0, beta_re=0.0)

    def replace(self, **changes) -> LinkBudget:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SpatialCorrelation:
    """RIS correlation matrix ``R`` together with the Bob-Eve correlation ``rho``."""

    matrix: np.ndarray
    rho: float = 0.0
    frob_sq: float = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigError("correlation matrix must be square")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "frob_sq", frobenius_norm_sq(m))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def with_rho(self, rho: float) -> SpatialCorrelation:
        return SpatialCorrelation(self.matrix, rho)

    @classmethod
    def identity(cls, n: int, rho: float = 0.0) -> SpatialCorrelation:
        return cls(np.eye(n), rho)


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def path_loss_factor(d, alpha, c_db):
    """Linear power gain ``10**(-c_db/10) / d**alpha``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("path-loss distance must be positive")
    out = 10.0 ** (-c_db / 10.0) / d**alpha
    return float(out) if out.ndim == 0 else out


def pearson_correlation(d, wavelength):
    """Correlation of two receivers ``d`` apart: ``J0(2 pi d / lambda)**2``."""
    if wavelength <= 0:
        raise DomainError("wavelength must be positive")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("separation must be non-negative")
    out = np.clip(j0(2.0 * np.pi * d / wavelength) ** 2, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def frobenius_norm_sq(matrix) -> float:
    m = np.asarray(matrix, dtype=float)
    return float(np.sum(m * m))


def build_ris_correlation(layout: RisLayout, wavelength: float, rho: float = 0.0) -> SpatialCorrelation:
    """Isotropic-scattering correlation ``sinc(2 pi |u_n - u_m| / lambda)``."""
    if wavelength <= 0:
        raise DomainError("wavelength must be positive")
    u = layout.element_coordinates()
    dist = np.linalg.norm(u[:, None, :] - u[None, :, :], axis=-1)
    off_diag = ~np.eye(layout.n_elements, dtype=bool)
    if np.any(dist[off_diag] == 0):
        raise ConfigError("two RIS elements share a position")
    # np.sinc is the normalized sinc: sin(pi x) / (pi x)
    matrix = np.sinc(2.0 * dist / wavelength)
    return SpatialCorrelation(matrix, rho)


def link_budget_from_geometry(
    alice: Position,
    bob: Position,
    eve: Position,
    ris: RisLayout | None,
    pl: PathLossSpec,
    carrier_hz: float,
    tx_power_dbm: float,
    noise_dbm: float,
    antenna_gain_mode: str = "off",
) -> LinkBudget:
    """Derive every large-scale gain from node positions.

    RIS links are measured from the array center. ``antenna_gain_mode``
    selects how ``pl.antenna_gain_db`` enters:

    ``"off"``
        no gain anywhere.
    ``"ris_links"``
        the gain multiplies each RIS hop (``ar``, ``rb``, ``re``) once.
    ``"ap_and_ris"``
        Alice's antenna and every RIS element carry the gain, so direct links
        from Alice get it once, the Alice-RIS hop twice and the RIS-Bob/Eve
        hops once.

    Penetration loss applies to the Alice-Bob and Alice-Eve direct links.
    ``ris=None`` disables the surface (all RIS gains exactly zero).
    """
    if antenna_gain_mode not in ANTENNA_GAIN_MODES:
        raise ConfigError(f"unknown antenna gain mode {antenna_gain_mode!r}")
    nodes = {"alice": alice, "bob": bob, "eve": eve}
    if ris is not None:
        nodes["ris"] = ris.origin
    names = list(nodes)
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if nodes[a].distance(nodes[b]) <= 0:
                raise ConfigError(f"{a} and {b} overlap")

    c = pl.fixed_loss_db
    g = pl.antenna_gain_db
    direct_gain_db = {"off": 0.0, "ris_links": 0.0, "ap_and_ris": g}[antenna_gain_mode]
    pen = pl.penetration_loss_db

    def direct(p, q, offset_db):
        return path_loss_factor(p.distance(q), pl.exponent_direct, c) * db_to_linear(offset_db)

    beta_ab = direct(alice, bob, direct_gain_db - pen)
    beta_ae = direct(alice, eve, direct_gain_db - pen)
    beta_be = direct(bob, eve, 0.0)

    if ris is None:
        beta_ar = beta_rb = beta_re = 0.0
    else:
        ar_db, out_db = {"off": (0.0, 0.0), "ris_links": (g, g), "ap_and_ris": (2 * g, g)}[antenna_gain_mode]
        center = ris.origin

        def hop(p, offset_db):
            return path_loss_factor(p.distance(center), pl.exponent_ris, c) * db_to_linear(offset_db)

        beta_ar = hop(alice, ar_db)
        beta_rb = hop(bob, out_db)
        beta_re = hop(eve, out_db)

    return LinkBudget(
        beta_ab=beta_ab,
        beta_ae=beta_ae,
        beta_be=beta_be,
        beta_ar=beta_ar,
        beta_rb=beta_rb,
        beta_re=beta_re,
        wavelength=SPEED_OF_LIGHT / carrier_hz,
        tx_power=dbm_to_watts(tx_power_dbm),
        noise_power=dbm_to_watts(noise_dbm),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to derive a link budget and correlation structure.

    Defaults reproduce the simulation table: 3 GHz, 20x5 RIS at quarter-wave
    spacing, P = 25 dBm, noise -96 dBm, C = 30 dB, exponents 2.2 / 3.67.
    """

    carrier_hz: float = 3e9
    tx_power_dbm: float = 25.0
    noise_dbm: float = -96.0
    alice: Position = Position(0.0, 0.0, 1.5)
    bob: Position = Position(30.0, 0.0, 1.5)
    eve: Position = Position(31.0, 0.0, 1.5)
    ris_center: Position = Position(0.0, 3.0, 1.5)
    ris_cols: int = 20
    ris_rows: int = 5
    ris_spacing_wl: float = 0.25
    ris_enabled: bool = True
    path_loss: PathLossSpec = PathLossSpec()
    antenna_gain_mode: str = "off"
    correlation: str = "sinc"
    rho_mode: str = "declared"
    rho: float = 0.0

    def __post_init__(self):
        if self.carrier_hz <= 0:
            raise ConfigError("carrier frequency must be positive")
        if self.antenna_gain_mode not in ANTENNA_GAIN_MODES:
            raise ConfigError(f"antenna_gain_mode must be one of {ANTENNA_GAIN_MODES}")
        if self.correlation not in CORRELATION_MODELS:
            raise ConfigError(f"correlation must be one of {CORRELATION_MODELS}")
        if self.rho_mode not in RHO_MODES:
            raise ConfigError(f"rho_mode must be one of {RHO_MODES}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if self.ris_cols < 1 or self.ris_rows < 1 or self.ris_spacing_wl <= 0:
            raise ConfigError("invalid RIS layout")

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def n_elements(self) -> int:
        return self.ris_cols * self.ris_rows if self.ris_enabled else 0

    def layout(self) -> RisLayout:
        return RisLayout(self.ris_cols, self.ris_rows, self.ris_spacing_wl * self.wavelength, self.ris_center)

    def budget(self) -> LinkBudget:
        return link_budget_from_geometry(
            self.alice,
            self.bob,
            self.eve,
            self.layout() if self.ris_enabled else None,
            self.path_loss,
            self.carrier_hz,
            self.tx_power_dbm,
            self.noise_dbm,
            self.antenna_gain_mode,
        )

    @property
    def rho_derived(self) -> float:
        return pearson_correlation(self.bob.distance(self.eve), self.wavelength)

    @property
    def rho_effective(self) -> float:
        return self.rho if self.rho_mode == "declared" else self.rho_derived

    def spatial_correlation(self) -> SpatialCorrelation:
        rho = self.rho_effective
        if not self.ris_enabled:
            return SpatialCorrelation(np.zeros((0, 0)), rho)
        if self.correlation == "identity":
            return SpatialCorrelation.identity(self.n_elements, rho)
        return build_ris_correlation(self.layout(), self.wavelength, rho)

"""Simulation and analysis of RIS-assisted secret key generation."""

from .channels import ChannelBlock, PhaseMatrix, aggregate, draw_block, random_phase_matrix
from .config import RunConfig, load_config, parse_config, serialize_config
from .errors import ConfigError, DomainError, RisKeyError
from .keygen import KeyMaterial, ProtocolParams, match_prob_approx, quantize_phase, run_keygen
from .optimize import OptimizationResult, optimize_all
from .rates import CovarianceSummary, MonteCarloEstimate, RateReport, leakage, skr_lb
from .scene import LinkBudget, Position, RisLayout, ScenarioConfig, SpatialCorrelation
from .sweep import ResultRow, run_sweep

__version__ = "0.1.0"

__all__ = [
    "ChannelBlock",
    "ConfigError",
    "CovarianceSummary",
    "DomainError",
    "KeyMaterial",
    "LinkBudget",
    "MonteCarloEstimate",
    "OptimizationResult",
    "PhaseMatrix",
    "Position",
    "ProtocolParams",
    "RateReport",
    "ResultRow",
    "RisKeyError",
    "RisLayout",
    "RunConfig",
    "ScenarioConfig",
    "SpatialCorrelation",
    "aggregate",
    "draw_block",
    "leakage",
    "load_config",
    "match_prob_approx",
    "optimize_all",
    "parse_config",
    "quantize_phase",
    "random_phase_matrix",
    "run_keygen",
    "run_sweep",
    "serialize_config",
    "skr_lb",
]

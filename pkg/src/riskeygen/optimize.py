"""Choosing key-generation time, RIS switching interval and quantizer size.

The joint problem is split into one-parameter steps: ``T_s`` is fixed at
its analytic optimum, ``T_k`` balances key and message throughput, and
``Q`` is picked by exhaustive search over powers of two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .keygen import ProtocolParams, match_prob_approx
from .rates import eskr, info_rate_tilde, scenario_covariance, secrecy_rate
from .scene import ScenarioConfig

DEFAULT_Q_CANDIDATES = (2, 4, 8, 16, 32, 64)


@dataclass
class OptimizationResult:
    t_key_star: int
    t_key_star_closed: int
    t_switch_star: int
    q_star: int
    secrecy_rate: float
    search_trace: list = field(default_factory=list)

    def check(self, t_total):
        """Raise if the tuple violates the problem constraints."""
        tk, ts, q = self.t_key_star, self.t_switch_star, self.q_star
        ok = (
            tk % 2 == 0
            and 2 <= tk <= t_total
            and tk % ts == 0
            and 2 <= ts <= tk
            and q >= 2
            and q & (q - 1) == 0
            and self.secrecy_rate >= 0
        )
        if not ok:
            raise DomainError(f"infeasible optimization result {self}")
        return self


def feasible_t_keys(t_total, t_switch, min_intervals=1):
    """Even multiples of ``T_s`` in ``[max(2, min_intervals * T_s), T]``."""
    step = t_switch if t_switch % 2 == 0 else 2 * t_switch
    start = max(step, min_intervals * t_switch)
    start = -(-start // step) * step
    return list(range(start, t_total + 1, step))


def _round_to_grid(value, grid):
    grid = np.asarray(grid)
    return int(grid[np.argmin(np.abs(grid - value))])


def loglog_term(l):
    """``log2(ln L)``: the extreme-value gain of picking the best of ``L``."""
    if l < 2:
        raise DomainError("log log L needs L >= 2")
    return math.log2(math.log(l))


def tk_closed_form(t_total, r_key, r_info_tilde, t_switch=2):
    """Intersection of the linear key and message throughput lines, rounded
    to the nearest feasible ``T_k``."""
    if r_key + r_info_tilde <= 0:
        raise DomainError("rates must not both be zero")
    raw = t_total * r_info_tilde / (r_key + r_info_tilde)
    grid = feasible_t_keys(t_total, t_switch)
    if not grid:
        raise ConfigError("no feasible t_key")
    return _round_to_grid(raw, grid)


def tk_objective(t_key, t_total, t_switch, r_key, r_info_tilde, loglog=True):
    info = r_info_tilde + (loglog_term(t_key / t_switch) if loglog else 0.0)
    return abs(t_key / (2.0 * t_total) * r_key - (t_total - t_key) / t_total * info)


def tk_numeric(t_total, t_switch, r_key, r_info_tilde, loglog=True, trace=None):
    """Grid argmin of the key/message imbalance including the ``log2 ln L``
    term of the scaling law. Candidates with ``L < 2`` are skipped when the
    term is on."""
    grid = feasible_t_keys(t_total, t_switch, min_intervals=2 if loglog else 1)
    if not grid:
        raise ConfigError(f"no feasible t_key for T={t_total}, T_s={t_switch}")
    best, best_val = None, math.inf
    for tk in grid:
        val = tk_objective(tk, t_total, t_switch, r_key, r_info_tilde, loglog)
        if trace is not None:
            trace.append((("t_key", tk), val))
        if val < best_val:
            best, best_val = tk, val
    return best


def ts_optimal(t_switch_min=2):
    """Fastest feasible switching: ``T_s = 2`` unless hardware forbids it."""
    if t_switch_min <= 2:
        return 2
    return int(t_switch_min + (t_switch_min % 2))


def key_rate_at(scenario: ScenarioConfig, t_switch, q_levels, t_total=1000):
    """ESKR using the match-probability approximation at the effective SNR."""
    params = ProtocolParams(t_total=t_total, t_key=t_switch, t_switch=t_switch, q_levels=q_levels)
    cov = scenario_covariance(scenario, params)
    return eskr(match_prob_approx(q_levels, cov.snr), q_levels, t_switch)


def info_rate_at(scenario: ScenarioConfig, n_intervals):
    corr = scenario.spatial_correlation()
    return info_rate_tilde(scenario.budget(), corr.frob_sq) + loglog_term(n_intervals)


def secrecy_objective(scenario: ScenarioConfig, t_total, t_key, t_switch, q_levels, r_info=None):
    """Secrecy rate at one parameter tuple; ``r_info`` overrides the
    scaling-law information rate (e.g. with a Monte Carlo value)."""
    r_key = key_rate_at(scenario, t_switch, q_levels, t_total)
    if r_info is None:
        r_info = info_rate_at(scenario, t_key // t_switch)
    return secrecy_rate(r_key, r_info, t_total, t_key)


def q_search(scenario: ScenarioConfig, params: ProtocolParams, q_candidates=DEFAULT_Q_CANDIDATES, trace=None):
    """Quantizer size maximizing ``R_k R_I / (2 (R_k + R_I))``; ties go to
    the smaller ``Q``."""
    qs = sorted(set(int(q) for q in q_candidates))
    if not qs:
        raise ConfigError("no Q candidates")
    for q in qs:
        if q < 2 or q & (q - 1):
            raise ConfigError(f"Q candidate {q} is not a power of two >= 2")
    r_info = info_rate_at(scenario, params.n_intervals)
    best, best_val = None, -math.inf
    for q in qs:
        r_key = key_rate_at(scenario, params.t_switch, q, params.t_total)
        val = r_key * r_info / (2.0 * (r_key + r_info)) if r_key + r_info > 0 else 0.0
        if trace is not None:
            trace.append((("q_levels", q), val))
        if val > best_val + 1e-15:
            best, best_val = q, val
    return best


def tk_choice(scenario: ScenarioConfig, t_total, t_switch, q_levels, closed=False):
    """``T_k`` at fixed ``(T_s, Q)`` from the grid scan or the closed form."""
    r_tilde = info_rate_at(scenario, 2) - loglog_term(2)
    r_key = key_rate_at(scenario, t_switch, q_levels, t_total)
    if closed:
        return tk_closed_form(t_total, r_key, r_tilde, t_switch)
    return tk_numeric(t_total, t_switch, r_key, r_tilde)


def optimize_at_ts(scenario: ScenarioConfig, t_total, t_switch, n_blocks=100, q_candidates=DEFAULT_Q_CANDIDATES, q_provisional=4, trace=None):
    """``T_k`` at a provisional ``Q``, then ``Q``, then ``T_k`` again, all at
    a fixed switching interval."""
    trace = [] if trace is None else trace
    r_tilde = info_rate_at(scenario, 2) - loglog_term(2)

    r_key = key_rate_at(scenario, t_switch, q_provisional, t_total)
    tk = tk_numeric(t_total, t_switch, r_key, r_tilde, trace=trace)

    params = ProtocolParams(t_total=t_total, t_key=tk, t_switch=t_switch, q_levels=q_provisional, n_blocks=n_blocks)
    q = q_search(scenario, params, q_candidates, trace=trace)

    r_key = key_rate_at(scenario, t_switch, q, t_total)
    tk = tk_numeric(t_total, t_switch, r_key, r_tilde, trace=trace)
    tk_closed = tk_closed_form(t_total, r_key, r_tilde, t_switch)
    rate = max(0.0, secrecy_objective(scenario, t_total, tk, t_switch, q))
    trace.append((("final", (tk, t_switch, q)), rate))
    return OptimizationResult(tk, tk_closed, t_switch, q, rate, trace)


def optimize_all(
    scenario: ScenarioConfig,
    t_total=1000,
    n_blocks=100,
    t_switch_min=2,
    q_candidates=DEFAULT_Q_CANDIDATES,
    q_provisional=4,
) -> OptimizationResult:
    """Decoupled one-shot heuristic: ``T_s``, then ``T_k`` at a provisional
    ``Q``, then ``Q``, then ``T_k`` once more at the chosen ``Q``."""
    ts = ts_optimal(t_switch_min)
    trace = [(("t_switch", ts), None)]
    res = optimize_at_ts(scenario, t_total, ts, n_blocks, q_candidates, q_provisional, trace)
    return res.check(t_total)

"""Deterministic parameter sweeps and CSV output.

Stochastic metrics split their trials into fixed-size chunks. Chunk ``c`` of
metric ``m`` at sweep point ``i`` draws from
``SeedSequence([master_seed, i, crc32(m), c])``, so results do not depend on
the number of workers or the order in which chunks finish.
"""

from __future__ import annotations

import csv
import io
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rates
from .errors import ConfigError, DomainError
from .keygen import empirical_kmr, match_prob_approx, run_keygen
from .rates import MonteCarloEstimate
from .scene import Position

CSV_HEADER = ("x", "metric", "mean", "stderr", "trials", "seed")

# trials per seeded chunk
KEYGEN_CHUNK = 8
RATE_CHUNK = 2000


@dataclass(frozen=True)
class ResultRow:
    x: float
    metric: str
    mean: float
    stderr: float
    trials: int
    seed: int

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValueError("stderr must be non-negative")

    def cells(self):
        return (_num(self.x), self.metric, _num(self.mean), _num(self.stderr), str(self.trials), str(self.seed))


def _num(v):
    return format(float(v), ".12g")


def apply_sweep(scenario, protocol, variable, value):
    """Return ``(scenario, protocol)`` with one sweep variable set."""
    v = float(value)

    def as_int(name):
        if v != int(v):
            raise ConfigError(f"{name} must be an integer, got {value}")
        return int(v)

    if variable == "N":
        n = as_int("N")
        rows = scenario.ris_rows
        if n < 1 or n % rows:
            raise ConfigError(f"N={n} is not a multiple of ris_rows={rows}")
        return scenario.replace(ris_cols=n // rows), protocol
    if variable == "T_s":
        return scenario, protocol.replace(t_switch=as_int("T_s"))
    if variable == "T_k":
        return scenario, protocol.replace(t_key=as_int("T_k"))
    if variable == "Q":
        return scenario, protocol.replace(q_levels=as_int("Q"))
    if variable == "snr_db":
        return scenario.replace(tx_power_dbm=scenario.noise_dbm + v), protocol
    if variable == "eve_x":
        e = scenario.eve
        return scenario.replace(eve=Position(v, e.y, e.z)), protocol
    if variable == "L":
        l = as_int("L")
        if l < 1 or protocol.t_key % l or (protocol.t_key // l) % 2:
            raise ConfigError(f"L={l} does not give an even T_s for T_k={protocol.t_key}")
        return scenario, protocol.replace(t_switch=protocol.t_key // l)
    raise ConfigError(f"unknown sweep variable {variable!r}")


# ------------------------------------------------------------------ metrics


class Point:
    """Lazily derived quantities for one sweep point."""

    def __init__(self, scenario, protocol):
        self.scenario = scenario
        self.protocol = protocol
        self.budget = scenario.budget()
        self.corr = scenario.spatial_correlation()
        self.cov = rates.scenario_covariance(scenario, protocol)

    @property
    def t_switch(self):
        return self.protocol.t_switch

    def eskr(self):
        p = self.protocol
        return rates.eskr(match_prob_approx(p.q_levels, self.cov.snr), p.q_levels, p.t_switch)

    def key_term_share(self, r_key):
        p = self.protocol
        return p.t_key / (2.0 * p.t_total) * r_key

    def info_term_share(self, r_info):
        p = self.protocol
        return (p.t_total - p.t_key) / p.t_total * r_info


def _closed(fn):
    return ("closed", fn)


def _skr_no_ris(pt):
    return rates.skr_lb_no_ris(pt.budget, pt.corr.rho, pt.cov.sigma_bar_sq, pt.t_switch)


def _scaling(pt):
    return rates.scaling_law_rate(pt.protocol.n_intervals, pt.budget, pt.corr.frob_sq)


def _secrecy(pt):
    return rates.secrecy_rate(pt.eskr(), _scaling(pt), pt.protocol.t_total, pt.protocol.t_key)


def _secrecy_skr(pt):
    return rates.secrecy_rate(rates.skr_lb(pt.cov, pt.t_switch), _scaling(pt), pt.protocol.t_total, pt.protocol.t_key)


def _secrecy_tk(closed):
    def fn(pt):
        from .optimize import secrecy_objective, tk_choice

        p = pt.protocol
        tk = tk_choice(pt.scenario, p.t_total, p.t_switch, p.q_levels, closed=closed)
        return max(0.0, secrecy_objective(pt.scenario, p.t_total, tk, p.t_switch, p.q_levels))

    return fn


def _secrecy_optimized(pt):
    from .optimize import optimize_at_ts

    p = pt.protocol
    return optimize_at_ts(pt.scenario, p.t_total, p.t_switch).secrecy_rate


CLOSED_METRICS = {
    "skr_lb": lambda pt: rates.skr_lb(pt.cov, pt.t_switch),
    "skr_lb_per_estimate": lambda pt: rates.skr_lb(pt.cov, pt.t_switch) * pt.t_switch / 2.0,
    "skr_lb_uncorrelated": lambda pt: rates.skr_lb_uncorrelated(pt.cov, pt.t_switch),
    "skr_lb_no_ris": _skr_no_ris,
    "skr_lb_no_ris_per_estimate": lambda pt: _skr_no_ris(pt) * pt.t_switch / 2.0,
    "leakage": lambda pt: rates.leakage(pt.cov),
    "leakage_limit": lambda pt: rates.leakage_limit(pt.budget, pt.corr.rho, pt.corr.frob_sq),
    "leakage_no_ris": lambda pt: rates.leakage_no_ris(pt.corr.rho),
    "eve_intercept_bound": lambda pt: rates.eve_intercept_bound(
        rates.leakage(pt.cov), pt.protocol.q_levels, pt.protocol.n_blocks
    ),
    "match_prob": lambda pt: match_prob_approx(pt.protocol.q_levels, pt.cov.snr),
    "eskr": lambda pt: pt.eskr(),
    "scaling_law_rate": _scaling,
    "secrecy_rate": _secrecy,
    "secrecy_rate_skr": _secrecy_skr,
    "secrecy_rate_tk_numeric": _secrecy_tk(False),
    "secrecy_rate_tk_closed": _secrecy_tk(True),
    "secrecy_rate_optimized": _secrecy_optimized,
    "rho": lambda pt: pt.corr.rho,
    "frob_sq": lambda pt: pt.corr.frob_sq,
}


def _keygen_chunk(kind):
    def run(rng, pt, n):
        vals = []
        for _ in range(n):
            _, keys = run_keygen(rng, pt.scenario, pt.protocol)
            if kind == "kmr_ab":
                vals.append(empirical_kmr(keys.bits_alice, keys.bits_bob))
            elif kind == "kmr_ae":
                vals.append(empirical_kmr(keys.bits_alice, keys.bits_eve))
            elif kind == "kmr_be":
                vals.append(empirical_kmr(keys.bits_bob, keys.bits_eve))
            elif kind == "symbol_mismatch_ab":
                vals.append(empirical_kmr(keys.levels_alice, keys.levels_bob))
            elif kind == "match_rate_ab":
                vals.append(1.0 - empirical_kmr(keys.levels_alice, keys.levels_bob))
        return MonteCarloEstimate.from_samples(vals)

    return run


def _rate_chunk(fn):
    def run(rng, pt, n):
        return fn(rng, pt, n)

    return run


def _identity(pt, est):
    return est


def _secrecy_finalize(pt, est):
    key = pt.key_term_share(pt.eskr())
    info = pt.info_term_share(est.mean)
    if key <= info:
        return MonteCarloEstimate(key, 0.0, est.trials)
    p = pt.protocol
    return MonteCarloEstimate(info, (p.t_total - p.t_key) / p.t_total * est.stderr, est.trials)


def _direct_key_finalize(pt, est):
    key = pt.key_term_share(rates.direct_key_rate(pt.protocol, pt.budget))
    info = pt.info_term_share(est.mean)
    if key <= info:
        return MonteCarloEstimate(key, 0.0, est.trials)
    p = pt.protocol
    return MonteCarloEstimate(info, (p.t_total - p.t_key) / p.t_total * est.stderr, est.trials)


_ob = _rate_chunk(lambda rng, pt, n: rates.ergodic_rate_ob(rng, pt.scenario, pt.protocol, n))
_opt = _rate_chunk(lambda rng, pt, n: rates.optimal_ris_rate(rng, pt.scenario, n))
_direct = _rate_chunk(lambda rng, pt, n: rates.direct_rate(rng, pt.budget, n))


def _wiretap_chunk(rng, pt, n):
    # the clamp applies to the pooled mean, so chunks return the raw difference
    h = rates.complex_normal(rng, (2, n))
    snr = pt.budget.snr
    rb = np.log2(1.0 + snr * pt.budget.beta_ab * np.abs(h[0]) ** 2)
    re = np.log2(1.0 + snr * pt.budget.beta_ae * np.abs(h[1]) ** 2)
    return MonteCarloEstimate.from_samples(rb - re)


def _clamp(pt, est):
    return MonteCarloEstimate(max(0.0, est.mean), est.stderr, est.trials)


# name -> (chunk sampler, chunk size, finalize)
MC_METRICS = {
    "kmr_ab": (_keygen_chunk("kmr_ab"), KEYGEN_CHUNK, _identity),
    "kmr_ae": (_keygen_chunk("kmr_ae"), KEYGEN_CHUNK, _identity),
    "kmr_be": (_keygen_chunk("kmr_be"), KEYGEN_CHUNK, _identity),
    "symbol_mismatch_ab": (_keygen_chunk("symbol_mismatch_ab"), KEYGEN_CHUNK, _identity),
    "match_rate_ab": (_keygen_chunk("match_rate_ab"), KEYGEN_CHUNK, _identity),
    "ergodic_rate_ob": (_ob, RATE_CHUNK, _identity),
    "optimal_ris_rate": (_opt, RATE_CHUNK, _identity),
    "direct_rate": (_direct, RATE_CHUNK, _identity),
    "wiretap_rate": (_wiretap_chunk, RATE_CHUNK, _clamp),
    "secrecy_rate_mc": (_ob, RATE_CHUNK, _secrecy_finalize),
    "secrecy_rate_optimal": (_opt, RATE_CHUNK, _secrecy_finalize),
    "secrecy_rate_direct_key": (_direct, RATE_CHUNK, _direct_key_finalize),
}

METRICS = tuple(CLOSED_METRICS) + tuple(MC_METRICS)

# metrics that describe the system without the surface; sweeping N over
# them is a configuration mistake
RIS_FREE_METRICS = {
    "skr_lb_no_ris",
    "skr_lb_no_ris_per_estimate",
    "leakage_no_ris",
    "direct_rate",
    "wiretap_rate",
    "secrecy_rate_direct_key",
}


def check_metrics(cfg):
    for m in cfg.metrics:
        if m not in CLOSED_METRICS and m not in MC_METRICS:
            raise ConfigError(f"unknown metric {m!r}")
        if cfg.sweep_variable == "N" and m in RIS_FREE_METRICS:
            raise ConfigError(f"metric {m} does not depend on the RIS; sweeping N over it is meaningless")
        if cfg.sweep_variable == "L" and m in RIS_FREE_METRICS - {"skr_lb_no_ris", "skr_lb_no_ris_per_estimate"}:
            raise ConfigError(f"metric {m} does not depend on L")


# ---------------------------------------------------------------- execution


def point_seed(master_seed, index):
    """64-bit seed reported for sweep point ``index``."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


def chunk_rng(master_seed, index, metric, chunk):
    ss = np.random.SeedSequence([master_seed, index, zlib.crc32(metric.encode()), chunk])
    return np.random.default_rng(ss)


def _chunk_sizes(trials, size):
    full, rest = divmod(trials, size)
    return [size] * full + ([rest] if rest else [])


def run_sweep(cfg, workers=None):
    """Evaluate every configured metric at every sweep point.

    Rows come out ordered by sweep point, then by metric as listed.
    Closed-form rows report ``stderr = 0`` and ``trials = 0``.
    """
    check_metrics(cfg)
    workers = cfg.workers if workers is None else workers
    return evaluate_points(cfg.points(), cfg.metrics, cfg.trials, cfg.master_seed, workers)


def evaluate_points(points, metrics, trials, master_seed=0, workers=1):
    """Evaluate ``metrics`` at explicit ``(x, scenario, protocol)`` points."""
    for m in metrics:
        if m not in CLOSED_METRICS and m not in MC_METRICS:
            raise ConfigError(f"unknown metric {m!r}")
    points = [(x, Point(sc, pr)) for x, sc, pr in points]

    tasks = []
    for i, (x, pt) in enumerate(points):
        for m in metrics:
            if m in MC_METRICS:
                sampler, size, _ = MC_METRICS[m]
                for c, n in enumerate(_chunk_sizes(trials, size)):
                    tasks.append((i, m, c, n, sampler, pt))

    def work(task):
        i, m, c, n, sampler, pt = task
        return sampler(chunk_rng(master_seed, i, m, c), pt, n)

    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    parts = {}
    for (i, m, *_), est in zip(tasks, results):
        parts.setdefault((i, m), []).append(est)

    rows = []
    for i, (x, pt) in enumerate(points):
        seed = point_seed(master_seed, i)
        for m in metrics:
            if m in CLOSED_METRICS:
                rows.append(ResultRow(x, m, float(CLOSED_METRICS[m](pt)), 0.0, 0, seed))
            else:
                est = MC_METRICS[m][2](pt, MonteCarloEstimate.combine(parts[(i, m)]))
                rows.append(ResultRow(x, m, est.mean, est.stderr, est.trials, seed))
    for r in rows:
        if not math.isfinite(r.mean):
            raise DomainError(f"metric {r.metric} is not finite at x={r.x}")
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))

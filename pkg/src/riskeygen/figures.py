"""Figure-data generators.

Each figure writes one CSV per plotted series into ``out_dir``, named
``<figure>__<series>.csv``, using the same six-column schema as sweeps.
"""

from __future__ import annotations

import math
import os

from .config import RunConfig
from .errors import ConfigError
from .rates import scenario_covariance
from .scene import Position
from .sweep import apply_sweep, evaluate_points, write_csv

FIGURES = ("skr_vs_n", "match_vs_snr", "kmr_vs_l", "rate_vs_snr", "rs_vs_ts", "rs_vs_q", "positions")

N_VALUES = tuple(range(10, 101, 10))
EFFECTIVE_SNR_DB = tuple(range(0, 41, 5))
L_VALUES = (1, 2, 4, 5, 10, 20, 25, 50, 100)
SNR_DB_VALUES = tuple(range(100, 141, 5))
TS_VALUES = (2, 4, 10, 20, 40)
Q_VALUES = (2, 4, 8, 16, 32, 64)
POWERS_DBM = (10, 15, 20, 25)
BOB_X = (10.0, 30.0, 50.0)
EVE_X = tuple(2.5 + 5.0 * k for k in range(12))

DEFAULT_TRIALS = {
    "match_vs_snr": 10,
    "kmr_vs_l": 20,
    "rate_vs_snr": 2000,
    "rs_vs_ts": 2000,
    "positions": 2000,
}


def at_effective_snr(scenario, protocol, snr_db):
    """Scenario whose transmit power gives ``rho_ab / sigma_bar^2 = snr``."""
    cov = scenario_covariance(scenario, protocol)
    target = 10.0 ** (snr_db / 10.0)
    p_watts = target * 2.0 * scenario.budget().noise_power / (cov.rho_ab * protocol.t_switch)
    return scenario.replace(tx_power_dbm=10.0 * math.log10(p_watts) + 30.0)


def _sweep(sc, pr, variable, values):
    return [(v, *apply_sweep(sc, pr, variable, v)) for v in values]


def _series(name, sc, pr):
    """``[(label, points, metrics)]`` for one figure."""
    out = []
    if name == "skr_vs_n":
        for model, tag in (("sinc", "corr_r"), ("identity", "identity")):
            for rho, rtag in ((0.0, "rho0"), (0.9, "rho0.9")):
                s = sc.replace(correlation=model, rho_mode="declared", rho=rho)
                out.append((f"{tag}_{rtag}", _sweep(s, pr, "N", N_VALUES), ("skr_lb", "skr_lb_per_estimate")))
        s = sc.replace(rho_mode="declared", rho=0.9)
        pts = [(n, s, pr) for n in N_VALUES]
        out.append(("no_ris_rho0.9", pts, ("skr_lb_no_ris", "skr_lb_no_ris_per_estimate")))
    elif name == "match_vs_snr":
        s = sc.replace(correlation="identity")
        for q in (2, 4, 8):
            p = pr.replace(q_levels=q)
            pts = [(v, at_effective_snr(s, p, v), p) for v in EFFECTIVE_SNR_DB]
            out.append((f"q{q}_analytic", pts, ("match_prob",)))
            out.append((f"q{q}_empirical", pts, ("match_rate_ab",)))
    elif name == "kmr_vs_l":
        p = pr.replace(t_key=200)
        s = sc.replace(eve=Position(31.0, 0.0, 1.5))
        for rho in (0.0, 0.9):
            s2 = s.replace(rho_mode="declared", rho=rho)
            out.append((f"rho{rho:g}", _sweep(s2, p, "L", L_VALUES), ("kmr_ab", "kmr_ae", "kmr_be")))
    elif name == "rate_vs_snr":
        p = pr.replace(t_key=200)
        for l in (4, 20, 100):
            sc_l, p_l = apply_sweep(sc, p, "L", l)
            out.append((f"L{l}", _sweep(sc_l, p_l, "snr_db", SNR_DB_VALUES), ("ergodic_rate_ob", "scaling_law_rate")))
        pts = _sweep(sc, p, "snr_db", SNR_DB_VALUES)
        out.append(("optimal_ris", pts, ("optimal_ris_rate",)))
        out.append(("direct", pts, ("direct_rate",)))
    elif name == "rs_vs_ts":
        pts = _sweep(sc, pr, "T_s", TS_VALUES)
        out.append(("fixed_eskr", pts, ("secrecy_rate",)))
        out.append(("fixed_skr_lb", pts, ("secrecy_rate_skr",)))
        out.append(("fixed_eskr_mc", pts, ("secrecy_rate_mc",)))
        out.append(("optimized", pts, ("secrecy_rate_optimized",)))
    elif name == "rs_vs_q":
        for pw in POWERS_DBM:
            s = sc.replace(tx_power_dbm=float(pw))
            out.append((f"p{pw}dbm", _sweep(s, pr, "Q", Q_VALUES), ("secrecy_rate_tk_numeric", "secrecy_rate_tk_closed")))
    elif name == "positions":
        for bx in BOB_X:
            s = sc.replace(bob=Position(bx, sc.bob.y, sc.bob.z))
            pts = _sweep(s, pr, "eve_x", EVE_X)
            out.append((f"bob{bx:g}", pts, ("secrecy_rate_mc", "secrecy_rate_direct_key", "wiretap_rate")))
    else:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return out


def figure(name, out_dir=".", config: RunConfig | None = None, seed=None, trials=None, workers=None):
    """Write the series of figure ``name``; returns ``{series: path}``."""
    cfg = config or RunConfig()
    seed = cfg.master_seed if seed is None else seed
    trials = trials or DEFAULT_TRIALS.get(name, cfg.trials)
    workers = workers or cfg.workers
    series = _series(name, cfg.scenario, cfg.protocol)
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for label, points, metrics in series:
        rows = evaluate_points(points, metrics, trials, seed, workers)
        path = os.path.join(out_dir, f"{name}__{label}.csv")
        write_csv(rows, path)
        paths[label] = path
    return paths

"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numeric domain error.
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, load_config
from .errors import ConfigError, DomainError
from .figures import FIGURES, figure
from .optimize import DEFAULT_Q_CANDIDATES, optimize_all
from .sweep import rows_to_csv, run_sweep

EXIT_CONFIG = 2
EXIT_DOMAIN = 3


def _cmd_sweep(args):
    cfg = load_config(args.config)
    rows = run_sweep(cfg, workers=args.workers)
    text = rows_to_csv(rows)
    out = args.out or cfg.output_path
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {out}")


def _cmd_figure(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    paths = figure(args.name, args.out, cfg, seed=args.seed, trials=args.trials, workers=args.workers)
    for label, path in paths.items():
        print(f"{label}\t{path}")


def _cmd_optimize(args):
    cfg = load_config(args.config)
    res = optimize_all(
        cfg.scenario,
        t_total=cfg.protocol.t_total,
        n_blocks=cfg.protocol.n_blocks,
        t_switch_min=args.t_switch_min,
        q_candidates=DEFAULT_Q_CANDIDATES,
    )
    print(f"t_key_star = {res.t_key_star}")
    print(f"t_key_star_closed = {res.t_key_star_closed}")
    print(f"t_switch_star = {res.t_switch_star}")
    print(f"q_star = {res.q_star}")
    print(f"secrecy_rate = {res.secrecy_rate:.12g}")
    if args.trace:
        for cand, val in res.search_trace:
            print(f"trace {cand[0]}={cand[1]} {'' if val is None else format(val, '.12g')}")


def _cmd_validate(args):
    cfg = load_config(args.config)
    sc, pr = cfg.scenario, cfg.protocol
    corr = sc.spatial_correlation()
    print(f"ok: N={sc.n_elements} T={pr.t_total} T_k={pr.t_key} T_s={pr.t_switch} Q={pr.q_levels} F={pr.n_blocks}")
    print(f"rho_declared={sc.rho:.6g} rho_derived={sc.rho_derived:.6g} rho_used={corr.rho:.6g}")
    if cfg.sweep_variable:
        print(f"sweep {cfg.sweep_variable}: {len(cfg.sweep_values)} points, metrics {','.join(cfg.metrics)}")


def build_parser():
    ap = argparse.ArgumentParser(prog="riskeygen", description="RIS-assisted secret key generation simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the sweep in a config file and write CSV")
    p.add_argument("config")
    p.add_argument("--out", help="output path ('-' for stdout); default run.output_path")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="write figure-data CSVs")
    p.add_argument("name", choices=FIGURES)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".")
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("optimize", help="optimize T_k, T_s and Q for a scenario")
    p.add_argument("config")
    p.add_argument("--t-switch-min", type=int, default=2)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("validate", help="parse and check a config")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())

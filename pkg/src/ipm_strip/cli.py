"""Command line interface: ``ipm-strip {run, verify, fit-decay, make-ic}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .config import SimConfig
from .exceptions import ConfigError, IPMError
from .fitting import fit_decay
from .initial import make_initial_data
from .runner import EXIT_ABORT, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY, read_csv, run
from .spectral import write_snapshot
from .verify import SUITES, verify


def _common(parser):
    parser.add_argument("--config", metavar="PATH", help="config file (key = value with sections)")
    parser.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
                        help="override a config key; repeatable")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config)")
    parser.add_argument("--threads", type=int, help="FFT worker threads")


def load_config(args) -> SimConfig:
    cfg = SimConfig.from_file(args.config) if args.config else SimConfig()
    cfg = cfg.with_overrides(args.overrides)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipm-strip", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evolve a configuration and write CSV, manifest and snapshots")
    _common(p_run)
    p_run.add_argument("--out", metavar="DIR", required=True, help="output directory")

    p_ver = sub.add_parser("verify", help="run a verification suite")
    _common(p_ver)
    p_ver.add_argument("suite", choices=SUITES + ("all",))
    p_ver.add_argument("--seeds", type=int, default=10, help="random cases per property")
    p_ver.add_argument("--out", metavar="FILE", help="also write the report to FILE")

    p_fit = sub.add_parser("fit-decay", help="fit a power law to a diagnostics column")
    p_fit.add_argument("csv", help="diagnostics.csv written by 'run'")
    p_fit.add_argument("--column", default="l2_rho", help="CSV column (default l2_rho)")
    p_fit.add_argument("--k", type=int, help="monitor order for hk_* columns")
    p_fit.add_argument("--monitors", default="0,3,5,13", help="monitor list used by the run")
    p_fit.add_argument("--window", nargs=2, type=float, metavar=("T0", "T1"))

    p_ic = sub.add_parser("make-ic", help="write the configured initial data as a snapshot")
    _common(p_ic)
    p_ic.add_argument("--out", metavar="FILE", required=True, help="snapshot file")
    return parser


def cmd_run(args) -> int:
    cfg = load_config(args)
    result = run(cfg, args.out, threads=args.threads)
    last = result.records[-1] if result.records else None
    if result.exit_code == EXIT_ABORT:
        print(f"aborted: {result.message}", file=sys.stderr)
    elif last is not None:
        print(f"t={last.t:g} l2_rho={last.l2_rho:.6e} bkm={last.bkm_accumulator:.6e} -> {args.out}")
    return result.exit_code


def cmd_verify(args) -> int:
    cfg = load_config(args)
    checks = verify(args.suite, cfg, seeds=args.seeds)
    lines = [c.line() for c in checks]
    print("\n".join(lines))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


def cmd_fit(args) -> int:
    cols = read_csv(args.csv)
    if args.column not in cols:
        raise ConfigError(f"unknown column {args.column!r}")
    values = cols[args.column]
    if values.ndim == 2:
        if args.k is None:
            raise ConfigError(f"column {args.column} holds one value per monitor; pass --k")
        monitors = [int(v) for v in args.monitors.split(",")]
        if args.k not in monitors:
            raise ConfigError(f"k={args.k} is not among the monitors {monitors}")
        values = values[:, monitors.index(args.k)]
    print(fit_decay(cols["t"], np.asarray(values), args.window))
    return EXIT_OK


def cmd_make_ic(args) -> int:
    cfg = load_config(args)
    write_snapshot(make_initial_data(cfg), args.out, {"kind": cfg.initial_kind, "epsilon": cfg.epsilon})
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "fit-decay": cmd_fit, "make-ic": cmd_make_ic}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IPMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())

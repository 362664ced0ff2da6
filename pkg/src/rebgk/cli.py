"""Command line: ``rebgk {run,case1,case2,validate,bessel}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import bessel
from .auxsolver import SolverError
from .config import ConfigError, case1_config, case2_config, load_config
from .dynamics import RunAborted
from .output import OutputError, fmt, resolve_output_dir, run_config

log = logging.getLogger("rebgk")


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rebgk", description="Relativistic BGK relaxation of a reactive four-species mixture.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("run", help="run a scenario from a TOML config file")
    p.add_argument("config", help="path to the config file")
    p.add_argument("--out", help="output directory (overrides $REBGK_OUT and the config)")

    for name, preset in (("case1", "Juttner initial data, t_end = 10"), ("case2", "triangular initial data, t_end = 30")):
        p = sub.add_parser(name, help=f"preset benchmark: {preset}")
        p.add_argument("--out", help="output directory (overrides $REBGK_OUT)")
        p.add_argument("--dt", type=_positive_float)
        p.add_argument("--t-end", type=_positive_float)
        p.add_argument("--stride", type=_positive_int)

    p = sub.add_parser("validate", help="run the solver and Bessel property checks")
    p.add_argument("--full", action="store_true", help="acceptance-size sample counts")

    p = sub.add_parser("bessel", help="tabulate K0, K1, K2")
    p.add_argument("z", nargs="+", type=_positive_float, help="arguments z > 0")
    p.add_argument("--oracle", action="store_true", help="add quadrature reference columns")
    return parser


def _run(cfg, out) -> int:
    out_dir = resolve_output_dir(cfg, out)
    log.info("running %s into %s", cfg.scenario, out_dir)
    try:
        result = run_config(cfg, out_dir)
    except RunAborted as exc:
        print(f"error: run aborted: {exc}; partial output in {out_dir}", file=sys.stderr)
        return 3
    final = result.series[-1]
    print(f"wrote {out_dir}: {len(result.series)} rows, {len(result.snapshots)} snapshots, t = {final.t:g}")
    if result.negativity_events:
        print(f"warning: {result.negativity_events} steps undershot below zero", file=sys.stderr)
    return 0


def _cmd_run(args) -> int:
    return _run(load_config(args.config), args.out)


def _cmd_preset(args) -> int:
    cfg = case1_config() if args.command == "case1" else case2_config()
    changes = {k: v for k, v in (("dt", args.dt), ("t_end", args.t_end), ("stride", args.stride)) if v is not None}
    if "t_end" in changes:
        changes["snapshot_times"] = (0.0, changes["t_end"])
    if changes:
        cfg = replace(cfg, **changes)
    return _run(cfg, args.out)


def _cmd_validate(args) -> int:
    from .checks import run_all

    results = run_all(quick=not args.full)
    for r in results:
        print(r.line())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 1 if n_fail else 0


def _k_or_nan(order, z):
    try:
        return bessel.besselK(order, z)
    except bessel.BesselUnderflowError:
        return float("nan")


def _cmd_bessel(args) -> int:
    cols = ["z", "K0", "K1", "K2"]
    if args.oracle:
        from .oracles import besselK_quadrature

        cols += ["K0_quad", "K1_quad", "K2_quad"]
    print(",".join(cols))
    for z in args.z:
        row = [z] + [_k_or_nan(n, z) for n in (0, 1, 2)]
        if args.oracle:
            row += [besselK_quadrature(n, z) for n in (0, 1, 2)]
        print(",".join(fmt(v) for v in row))
    return 0


COMMANDS = {
    "run": _cmd_run,
    "case1": _cmd_preset,
    "case2": _cmd_preset,
    "validate": _cmd_validate,
    "bessel": _cmd_bessel,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, OutputError, SolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

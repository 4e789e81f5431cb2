"""Command-line entry point.

Subcommands: constants | solve | ergodic | verify-barrier | characterize | sweep.
Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 contract violation (monotonicity or residual certificate).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import ConfigError, load_config, parse_config_text
from .fracop import constants_table
from .pipeline import run_pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONTRACT = 4

_SUBCOMMAND_STAGES = {
    "constants": ["constants"],
    "solve": ["solve"],
    "ergodic": ["ergodic"],
    "verify-barrier": ["verify"],
    "characterize": ["characterize"],
}


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="censoredhj",
        description=(
            "Minimal large solutions and ergodic pairs of censored fractional "
            "Hamilton-Jacobi equations on an interval"
        ),
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in (*_SUBCOMMAND_STAGES, "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="path to the run configuration")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument(
            "--override", action="append", default=[], metavar="KEY=VALUE",
            help="section.key = value override, repeatable",
        )
        if name == "sweep":
            sp.add_argument("--constants-table", action="store_true",
                            help="emit the (s, gamma) constants sweep CSV")
            sp.add_argument("--s-values", default="0.6,0.75,0.9")
            sp.add_argument("--gamma-range", default="-0.9,1.4,0.1")
        if name == "solve" or name == "ergodic" or name == "characterize":
            sp.add_argument("--stages", default=None,
                            help="comma list of stages overriding the subcommand default")
    return ap


def _load(args):
    overrides = []
    for item in args.override:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must be KEY=VALUE")
        key, _, val = item.partition("=")
        overrides.append((key.strip(), val.strip()))
    if args.config is None:
        return parse_config_text("", overrides)
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "sweep":
        try:
            cfg = _load(args)
        except ConfigError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        svals = [float(t) for t in args.s_values.split(",")]
        lo, hi, step = (float(t) for t in args.gamma_range.split(","))
        gvals = np.arange(lo, hi + 0.5 * step, step)
        table = constants_table(svals, gvals)
        out = args.out or cfg.values["output"]["directory"]
        import os

        os.makedirs(out, exist_ok=True)
        path = os.path.join(out, "constants_sweep.csv")
        with open(path, "w") as fh:
            fh.write(table)
        print(path)
        return EXIT_OK

    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stages = _SUBCOMMAND_STAGES[args.command]
    if getattr(args, "stages", None):
        stages = [s.strip() for s in args.stages.split(",") if s.strip()]

    try:
        manifest = run_pipeline(cfg, stages, out_dir=args.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    if manifest["failure"] is not None:
        stage, msg = manifest["failure"]
        print(f"stage {stage} failed: {msg}", file=sys.stderr)
        return EXIT_NUMERICAL

    # contract checks surfaced by artifacts
    import os

    out_dir = args.out or cfg.values["output"]["directory"]
    solve_report = os.path.join(out_dir, "solve_report.txt")
    if os.path.exists(solve_report) and "solve" in stages:
        for line in open(solve_report):
            if line.startswith("monotone_violation"):
                if float(line.split("=")[1]) > 1e-10:
                    print("contract violation: monotonicity in R", file=sys.stderr)
                    return EXIT_CONTRACT
    verify_report = os.path.join(out_dir, "verify_report.txt")
    if os.path.exists(verify_report) and "verify" in stages:
        for line in open(verify_report):
            if "satisfied = False" in line:
                print("contract violation: barrier certificate failed", file=sys.stderr)
                return EXIT_CONTRACT

    for name in sorted(manifest["artifacts"]):
        print(f"{name}  {manifest['artifacts'][name]}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

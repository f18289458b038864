"""Command-line entry point.

Every experiment is driven by one JSON config (see README for the schema)
and writes CSVs plus a summary JSON into the output directory.  The exit
code is 0 exactly when every summary check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, load_config, run_experiment, validate_config


def _common(sub):
    sub.add_argument("--config", required=True, help="path to the JSON config")
    sub.add_argument("--out", default=None,
                     help="output directory (default: <config>.out)")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the config seed")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads for row evaluation")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="couplelab",
        description="sampling laboratory: chains, couplings, divergences, bounds")
    subs = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sub = subs.add_parser(name, help=f"run the {name} experiment")
        _common(sub)
    val = subs.add_parser("validate", help="validate a config without running")
    val.add_argument("--config", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config)

    if args.command == "validate":
        report = validate_config(cfg)
        rows = report.planned_rows
        out = {"ok": report.ok, "errors": report.errors,
               "warnings": report.warnings, "planned_rows": rows}
        print(json.dumps(out, indent=2))
        return 0 if report.ok else 1

    if cfg.get("experiment") != args.command:
        print(f"config declares experiment {cfg.get('experiment')!r} but the "
              f"subcommand is {args.command!r}", file=sys.stderr)
        return 2
    out_dir = Path(args.out) if args.out else Path(str(args.config) + ".out")
    try:
        result = run_experiment(cfg, out_dir, seed=args.seed,
                                threads=args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"experiment": result.experiment,
                      "csv": [str(p) for p in result.csv_paths],
                      "summary": str(result.summary_path),
                      "passed": result.passed}, indent=2))
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())

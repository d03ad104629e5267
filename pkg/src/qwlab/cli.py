"""Command line entry point.

Subcommands: run <config> [key=value ...], validate <config>, list-experiments.
Exit codes: 0 pass, 1 run error, 2 validation error, 3 acceptance-threshold
failure.  QWL_OUTPUT_DIR overrides the configured output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, apply_overrides, load_config, validate_config
from .experiments import run_experiment
from .solver import SolverError

EXIT_OK = 0
EXIT_RUN_ERROR = 1
EXIT_VALIDATION = 2
EXIT_THRESHOLD = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwlab",
        description="Pseudo-spectral experiments for the damped quintic wave equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a JSON config")
    run_p.add_argument("config", help="path to the config document")
    run_p.add_argument(
        "overrides",
        nargs="*",
        help="dotted key=value overrides applied after the file parse",
    )
    run_p.add_argument("--jobs", type=int, default=1, help="worker threads for ensembles")

    val_p = sub.add_parser("validate", help="validate a config without running")
    val_p.add_argument("config")

    sub.add_parser("list-experiments", help="print the experiment names")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(name)
        return EXIT_OK

    try:
        cfg = load_config(args.config)
        if args.command == "run":
            apply_overrides(cfg, args.overrides)
        config = validate_config(cfg)
    except ConfigError as err:
        print(f"validation error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "validate":
        print("ok")
        return EXIT_OK

    out_dir = Path(os.environ.get("QWL_OUTPUT_DIR", config.output_dir))
    try:
        summary = run_experiment(config, out_dir, jobs=max(1, args.jobs))
    except SolverError as err:
        where = f" at t={err.t:g}" if err.t is not None else ""
        print(f"run error: {err}{where}", file=sys.stderr)
        return EXIT_RUN_ERROR
    except (ValueError, OSError) as err:
        print(f"run error: {err}", file=sys.stderr)
        return EXIT_RUN_ERROR

    summary["pass"] = all(summary["passes"].values()) if summary["passes"] else True
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=False) + "\n")
    print(f"wrote {summary_path}")
    for name, ok in summary["passes"].items():
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}")
    return EXIT_OK if summary["pass"] else EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())

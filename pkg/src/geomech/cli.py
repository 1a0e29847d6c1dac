"""Command-line front end.

Usage:
    geomech <subcommand> --config experiment.json [--out DIR] [--seed N]

Subcommands: simulate, scatter, shift, capture, closure-check, brackets.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, GeomechError
from .lab.config import load_config
from .lab.experiments import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_SUBCOMMANDS = {
    "simulate": "integrate trajectories from explicit or generated initials",
    "scatter": "batch integration of an ensemble",
    "shift": "measure the anomalous transverse shift",
    "capture": "double-monopole capture experiment with entry-point comparison",
    "closure-check": "finite-difference closure residuals of the built-in models",
    "brackets": "coordinate bracket tables with Jacobi and pfaffian diagnostics",
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geomech",
        description="Monopole geometric-mechanics experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--seed", type=int, default=None, help="seed override")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg.experiment != args.command:
            raise ConfigError(
                f"config.experiment: is {cfg.experiment!r} but the "
                f"{args.command!r} subcommand was invoked"
            )
        if args.seed is not None:
            cfg.seed = args.seed
        result = run_experiment(cfg, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeomechError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if result.get("failures"):
        print(f"numerical failure: {result['failures']} member(s) failed; "
              f"see events.json", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

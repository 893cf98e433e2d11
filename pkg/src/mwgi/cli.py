"""Command-line entry point: ``python -m mwgi <experiment> [--config PATH] ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from . import experiments
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, DomainError, IllConditionedError, WidthUnresolvedError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

COMMANDS = {
    "sampling": experiments.run_sampling_experiment,
    "spatial": experiments.run_spatial_experiment,
    "reconstruct": experiments.run_reconstruction_experiment,
    "mse-sweep": experiments.run_mse_sweep,
    "coherence-report": experiments.run_coherence_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwgi", description="Microwave ghost-imaging experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__.splitlines()[0])
        p.add_argument("--config", help="experiment config file (defaults apply when omitted)")
        p.add_argument("--out", help="output directory (overrides [output] directory)")
        p.add_argument("--seed", type=int, help="master seed (overrides [output] seed)")
        p.add_argument("--export-sequences", action="store_true",
                       help="also write each antenna's first-pulse chaotic chips as CSV (sampling)")
        p.add_argument("--verbose", "-v", action="store_true")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.out is not None:
        changes["directory"] = args.out
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative", key="seed")
        changes["seed"] = args.seed
    if args.export_sequences:
        changes["export_sequences"] = True
    if not changes:
        return cfg
    return dataclasses.replace(cfg, output=dataclasses.replace(cfg.output, **changes))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    log = logging.getLogger("mwgi")
    try:
        cfg = parse_config(args.config) if args.config else ExperimentConfig()
        cfg = _apply_overrides(cfg, args)
        written = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (IllConditionedError, WidthUnresolvedError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    except DomainError as exc:
        log.error("invalid parameters: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

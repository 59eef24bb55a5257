"""Command line entry point.

    dudesim simulate --config FILE [--out FILE] [--seed N]
    dudesim sweep --config FILE --param {lambda_s,gamma} --values v1,v2,... [--out FILE] [--seed N]
    dudesim extract-blockage --footprints FILE --region-area M2

Exit status: 0 on success, 1 on validation errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .blockage import beta_from_stats
from .config import SimConfig, parse_config
from .errors import InvalidParameterError
from .geometry import footprint_stats, read_footprints
from .runner import SWEEP_AXES, default_lambda_s_grid, simulate, sweep, write_csv

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _load_config(args) -> SimConfig:
    config = parse_config(Path(args.config).read_text()) if args.config else SimConfig()
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    return config


def _emit(rows, out):
    if out:
        write_csv(rows, out)
    else:
        write_csv(rows, sys.stdout)


def _parse_values(text: str) -> list[float]:
    values = []
    for item in text.split(","):
        item = item.strip()
        try:
            values.append(float(item))
        except ValueError:
            raise InvalidParameterError(f"--values entry '{item}' is not a number") from None
    return values


def cmd_simulate(args) -> int:
    config = _load_config(args)
    _emit([simulate(config, workers=args.workers)], args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args)
    if args.values:
        values = _parse_values(args.values)
    elif args.param == "lambda_s":
        values = default_lambda_s_grid(config.lambda_m)
    else:
        raise InvalidParameterError("--values is required for the gamma axis")
    _emit(sweep(config, args.param, values, workers=args.workers), args.out)
    return EXIT_OK


def cmd_extract_blockage(args) -> int:
    stats = footprint_stats(read_footprints(args.footprints), args.region_area)
    beta = beta_from_stats(stats)
    print(f"A = {stats.A:.6g}")
    print(f"kappa = {stats.kappa:.6g}")
    print(f"rho_perim = {stats.rho_perim:.6g}")
    print(f"beta = {beta:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dudesim", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_options(p):
        p.add_argument("--config", help="config file (all keys optional)")
        p.add_argument("--out", help="CSV destination (default: stdout)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("simulate", help="run one configuration")
    run_options(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one parameter")
    run_options(p)
    p.add_argument("--param", required=True, choices=SWEEP_AXES)
    p.add_argument("--values", help="comma-separated values (lambda_s defaults to a log grid)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("extract-blockage", help="blockage rate from a footprint file")
    p.add_argument("--footprints", required=True)
    p.add_argument("--region-area", type=float, required=True, help="region area in m^2")
    p.set_defaults(func=cmd_extract_blockage)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``hexgas run|collision-table|verify|measure``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import load_config
from .dynamics import default_table
from .engine import MEASUREMENTS, measure, run
from .exceptions import ConfigurationError, LatticeGasError
from .probes import ProbeStatus
from .verify import run_invariant_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hexgas",
        description="FHP-I lattice-gas simulation, invariant checks and transport probes.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Run a scenario and write frames")
    run_p.add_argument("--config", required=True, type=Path, help="key = value config file")
    run_p.add_argument("--mask", type=Path, help="Plain PBM obstacle bitmap")
    run_p.add_argument("--workers", type=_positive_int, help="Row-partition threads")

    sub.add_parser("collision-table", help="Print the 128 collision-table entries")

    verify_p = sub.add_parser("verify", help="Run the conservation and table invariant suite")
    verify_p.add_argument("--steps", type=_positive_int, default=1000)
    verify_p.add_argument("--size", type=_positive_int, default=100)
    verify_p.add_argument("--seed", type=int, default=12345)
    verify_p.add_argument("--workers", type=_positive_int, default=1)

    measure_p = sub.add_parser("measure", help="Run a transport probe")
    measure_p.add_argument("probe", choices=MEASUREMENTS)
    measure_p.add_argument("--config", required=True, type=Path)
    measure_p.add_argument("--output", type=Path, help="CSV path for the probe series")
    measure_p.add_argument("--workers", type=_positive_int)
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = run(config, mask_path=args.mask, workers=args.workers)
    summary = result.summary
    print(f"mass_start {summary.mass_start}")
    print(f"mass_end {summary.mass_end}")
    print(f"frames {len(result.frames)}")
    print(f"runtime {summary.runtime:.3f} s")
    print(f"site_updates_per_sec {summary.site_updates_per_sec:.4g}")
    for probe in result.probes.values():
        print(f"probe {probe.name} {probe.status.value} {probe.measured:.6g}")
    return EXIT_OK if summary.mass_conserved else EXIT_FAILURE


def _cmd_collision_table() -> int:
    # One "q s_in s_out" line per entry, q = 0 first.
    for q, s, out in default_table().entries():
        print(f"{q} {s} {out}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_invariant_suite(args.size, args.steps, args.seed, args.workers)
    for result in results:
        print(result.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} invariants hold")
    return EXIT_OK if passed == len(results) else EXIT_FAILURE


def _cmd_measure(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    result = measure(config, args.probe, workers=args.workers)
    print(result.report())
    output = args.output or Path(config.output_dir) / f"{result.name}.csv"
    result.to_csv(output)
    print(f"series written to {output}")
    return EXIT_FAILURE if result.status is ProbeStatus.FAILED else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "collision-table":
            return _cmd_collision_table()
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_measure(args)
    except ConfigurationError as e:
        print(f"hexgas: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except LatticeGasError as e:
        print(f"hexgas: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

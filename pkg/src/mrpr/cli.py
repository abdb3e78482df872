"""Command line driver.

    mrpr simulate --config sweep.cfg --output rows.csv [--seed N]
                  [--algorithm mrpr|aur|llr] [--trace events.log] [--timing]
    mrpr summarize --input rows.csv --output summary.csv

Exit codes: 0 success, 1 configuration error, 2 runtime invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import experiment, routing
from .errors import ConfigurationError, InvariantViolation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mrpr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured sweep")
    sim.add_argument("--config", required=True, help="experiment config file")
    sim.add_argument("--output", required=True, help="CSV file to write")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the config's base seed")
    sim.add_argument("--algorithm", choices=routing.ALGORITHMS, default=None,
                     help="restrict the sweep to one algorithm")
    sim.add_argument("--trace", default=None,
                     help="write a per-event trace log to this file")
    sim.add_argument("--timing", action="store_true",
                     help="record measured wall time per run (makes the CSV "
                          "nondeterministic)")

    summ = sub.add_parser("summarize", help="aggregate a sweep CSV")
    summ.add_argument("--input", required=True)
    summ.add_argument("--output", required=True)
    return parser


def _simulate(args) -> int:
    config = experiment.load_config(args.config)
    if args.seed is not None:
        config = replace(config, base_seed=args.seed)
    if args.algorithm is not None:
        config = replace(config, algorithms=(args.algorithm,))
    trace = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        result = experiment.run_sweep(config, measure_walltime=args.timing,
                                      trace=trace)
    finally:
        if trace is not None:
            trace.close()
    experiment.save_csv(result, args.output)
    return EXIT_OK


def _summarize(args) -> int:
    result = experiment.load_csv(args.input)
    if not result.rows:
        raise ConfigurationError("input CSV has no data rows")
    summary = experiment.summarize(result)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        experiment.write_summary_csv(summary, fh)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        return _summarize(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

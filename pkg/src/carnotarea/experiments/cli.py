"""Command line entry point: ``carnotarea validate FILE`` and ``carnotarea run FILE``.

Exit codes: 0 pass, 1 configuration or validation error, 2 acceptance
failure, 3 numeric or resource error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .. import errors
from . import runner, scenario

EXIT_PASS = 0
EXIT_CONFIG = 1
EXIT_ACCEPTANCE = 2
EXIT_NUMERIC = 3

# configuration-level failures: the scenario describes something invalid
_CONFIG_ERRORS = (errors.ConfigError, errors.StructureError, errors.AssumptionError,
                  errors.NotExtendableError, errors.EquiregularityError, errors.DomainError)

log = logging.getLogger("carnotarea")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="carnotarea", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    val = sub.add_parser("validate", help="check a scenario file without running it")
    val.add_argument("file", type=Path)
    run = sub.add_parser("run", help="run a scenario and write its CSV")
    run.add_argument("file", type=Path)
    run.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--workers", type=int, default=None,
                     help="worker threads (default: $CARNOTAREA_WORKERS or 1)")
    run.add_argument("--svg", action="store_true", help="also write an SVG figure")
    return parser


def _run(args) -> int:
    s = scenario.load(args.file)
    if args.command == "validate":
        print(f"{s.id}: valid {s.kind} scenario")
        return EXIT_PASS
    if args.seed is not None and args.seed < 0:
        raise errors.ConfigError("--seed must be nonnegative")
    if args.workers is not None and args.workers < 1:
        raise errors.ConfigError("--workers must be positive")
    report = runner.run_scenario(s, seed=args.seed, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / s.output.get("csv", f"{s.id}.csv")
    csv_path.write_text(report.to_csv())
    if args.svg:
        from .plots import write_svg

        write_svg(report, args.out / s.output.get("svg", f"{s.id}.svg"))
    print(report.summary())
    if report.passed:
        return EXIT_PASS
    return EXIT_CONFIG if s.kind == "validate" else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except _CONFIG_ERRORS as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (errors.CarnotError, np.linalg.LinAlgError, FloatingPointError, MemoryError) as exc:
        log.error("numeric error (%s): %s", type(exc).__name__, exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Run every scenario file in a directory and write their CSVs.

Exits with the worst CLI exit code seen (0 when everything passes).
"""

import argparse
import sys
import time
from pathlib import Path

from carnotarea.experiments import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scenarios", type=Path, default=ROOT / "scenarios")
    parser.add_argument("--out", type=Path, default=ROOT / "results")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--svg", action="store_true")
    parser.add_argument("--only", default="", help="substring filter on file names")
    args = parser.parse_args()

    worst = 0
    for path in sorted(args.scenarios.glob("*.json")):
        if args.only not in path.name:
            continue
        argv = ["run", str(path), "--out", str(args.out)]
        if args.workers:
            argv += ["--workers", str(args.workers)]
        if args.svg:
            argv.append("--svg")
        start = time.perf_counter()
        code = cli.main(argv)
        print(f"  [{path.name}: exit {code}, {time.perf_counter() - start:.1f} s]\n")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())

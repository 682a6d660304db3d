#!/usr/bin/env python3
"""Both sides of the area formula for one catalog map as the image grid is
refined, written as CSV to stdout."""

import argparse
import json
import sys

from carnotarea import measure
from carnotarea.experiments.scenario import parse_group, parse_map, parse_region


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--map", default='{"type": "homomorphism", "B1": [[2, 0], [0, 1]]}',
                        help="map spec as JSON, in the scenario-file format")
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--finest", type=int, default=5, help="finest grid is 2^-finest")
    args = parser.parse_args()

    alg = parse_group({"name": "heisenberg"})
    phi = parse_map(json.loads(args.map), alg)
    region = parse_region({"pieces": [{"center": [0, 0, 0], "radius": 1}]}, alg)
    lhs = measure.area_lhs(phi, region, args.samples, args.seed)
    out = sys.stdout
    out.write("image_delta,lhs,rhs,ratio\n")
    for k in range(2, args.finest + 1):
        rhs = measure.area_rhs_multiplicity(phi, region, 2.0 ** -k, args.seed,
                                            samples=args.samples)
        out.write(f"{2.0 ** -k:.17g},{lhs.value:.17g},{rhs.value:.17g},"
                  f"{lhs.value / rhs.value:.17g}\n")
        out.flush()


if __name__ == "__main__":
    main()

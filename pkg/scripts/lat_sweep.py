#!/usr/bin/env python3
"""Fitted decay rate of |d2_frame - d2_cone| on the variable Heisenberg frame
at several base points."""

import argparse

import numpy as np

from carnotarea import frame
from carnotarea.experiments import fit_loglog_slope, lat_deviations


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--finest", type=int, default=7, help="smallest scale is 2^-finest")
    args = parser.parse_args()

    frm = frame.variable_heisenberg()
    eps = [2.0 ** -k for k in range(2, args.finest + 1)]
    print(f"{'base point':>24}  slope   residual  deviations")
    for u in ([0.0, 0.0, 0.0], [0.25, 0.0, 0.0], [-0.2, 0.3, 0.1], [0.4, -1.0, 1.0]):
        data = lat_deviations(frm, np.array(u), eps, args.pairs, args.seed)
        fit = fit_loglog_slope(data)
        devs = " ".join(f"{d:.2e}" for _, d in data)
        print(f"{str(u):>24}  {fit.slope:.3f}  {fit.residual:.3f}     {devs}")


if __name__ == "__main__":
    main()

"""How the fusion gain and deviation on the case study move as the step shrinks."""

from __future__ import annotations

import argparse

import numpy as np

from artifact import fuse, load_case_study, select_degree, sensor_stats


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nu", type=float, default=0.5)
    parser.add_argument("--coarsest", type=float, default=0.05)
    parser.add_argument("--finest", type=float, default=1e-4)
    parser.add_argument("--points", type=int, default=15)
    args = parser.parse_args()

    stats = sensor_stats(load_case_study())
    model = select_degree(stats.points, 5, stats.true_value).model
    a, b = stats.window
    print(f"window [{a:.5f}, {b:.5f}], order {args.nu}")
    print(f"{'h':>10} {'n':>6} {'K':>9} {'S':>11} {'memory':>9}")
    for h in np.geomspace(args.coarsest, args.finest, args.points):
        if h >= b - a:
            continue
        res = fuse(model, stats, args.nu, h)
        print(f"{h:10.3g} {res.plan.n:6d} {res.amplification:9.5f} {res.normalized_std:11.8f} {res.plan.n * h:9.5f}")


if __name__ == "__main__":
    main()

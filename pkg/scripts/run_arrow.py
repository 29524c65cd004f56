"""Bounds for the second and third limit bands with a small disc inclusion, over a range of radii.

    python3 scripts/run_arrow.py --deltas 0.1 0.05 0.025 --direct
"""

import argparse

import numpy as np

from pcfbands.bands import detect_gaps, sweep, uniform_grid
from pcfbands.cell import CellSpec, Disc
from pcfbands.green import arrow_bounds


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--deltas", type=float, nargs="+", default=[0.1, 0.05, 0.025])
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--cutoff", type=int, default=64)
    p.add_argument("--direct", action="store_true", help="also run the limit solver on the grid")
    p.add_argument("--direct-cutoff", type=int, default=32)
    args = p.parse_args()

    grid = uniform_grid(args.grid)
    print(f"{'delta':>7} {'l2_upper':>10} {'l3_lower':>10} {'mu2/d^2':>10} {'c2':>7} {'certified':>9}  direct")
    for d in args.deltas:
        cell = CellSpec(Disc(d), 2.0, 1.0)
        rep = arrow_bounds(d, grid[np.any(grid != 0, axis=1)], cell, args.cutoff)
        direct = ""
        if args.direct:
            bands = sweep("limit", cell, grid, 4, {"cutoff": args.direct_cutoff, "source_cutoff": 4})
            ext = bands.extents
            gap = any(g.index == 2 for g in detect_gaps(bands))
            direct = f"band2 max {ext[1, 1]:.1f}, band3 min {ext[2, 0]:.1f}, gap={gap}"
        print(f"{d:7.4g} {rep.lambda2_max:10.2f} {rep.lambda3_lower:10.2f} {rep.mu2 / d**2:10.2f} "
              f"{rep.empirical_c2:7.3f} {str(rep.gap_certified):>9}  {direct}")


if __name__ == "__main__":
    main()

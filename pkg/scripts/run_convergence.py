"""Hausdorff distance between finite-contrast and limit band sets as eps decreases.

    python3 scripts/run_convergence.py --cutoff 16 --grid 8 --eps 0.2 0.1 0.05
"""

import argparse

from pcfbands.bands import hausdorff_distance, sweep, sweep_epsilon, uniform_grid
from pcfbands.cell import CellSpec, Disc


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--radius", type=float, default=0.3)
    p.add_argument("--eps0", type=float, default=2.0)
    p.add_argument("--eps1", type=float, default=1.0)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--source-cutoff", type=int, default=4)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--bands", type=int, default=4)
    p.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()

    cell = CellSpec(Disc(args.radius), args.eps0, args.eps1)
    thetas = uniform_grid(args.grid)
    res = {"cutoff": args.cutoff, "source_cutoff": args.source_cutoff}
    limit = sweep("limit", cell, thetas, args.bands, res, args.jobs)
    eps_bands = sweep_epsilon(cell, thetas, args.eps, args.bands, res, args.jobs)
    top = limit.extents[-1, 1]
    print("limit band extents:")
    for k, (lo, hi) in enumerate(limit.extents, start=1):
        print(f"  band {k}: [{lo:.6g}, {hi:.6g}]")
    print(f"{'eps':>8} {'hausdorff':>12} {'relative':>10}")
    for e in args.eps:
        d = hausdorff_distance(eps_bands[e].points(), limit.points())
        print(f"{e:8.4g} {d:12.6g} {d / top:10.3%}")


if __name__ == "__main__":
    main()

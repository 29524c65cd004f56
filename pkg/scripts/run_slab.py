"""Band diagram and gap edges of the layered (slab) cell from the exact dispersion relation.

    python3 scripts/run_slab.py --a 0.25 --b 0.75 --n-theta 21
"""

import argparse

import numpy as np

from pcfbands.slab import SlabProblem, gap_edges, trace_bands


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=0.25)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--eps0", type=float, default=2.0)
    p.add_argument("--eps1", type=float, default=1.0)
    p.add_argument("--n-theta", type=int, default=21)
    p.add_argument("--lam-max", type=float, default=200.0)
    p.add_argument("--bands", type=int, default=5)
    args = p.parse_args()

    prob = SlabProblem(args.a, args.b, args.eps0, args.eps1)
    thetas = np.linspace(0.0, 1.0, args.n_theta)
    bands = trace_bands(prob, thetas, (-1.0, args.lam_max), args.bands)
    for t, ev in zip(thetas, np.where(np.abs(bands.eigenvalues) < 1e-12, 0.0, bands.eigenvalues)):
        print(f"theta1={t:.3f}  " + "  ".join(f"{x:9.4f}" for x in ev))
    print("gaps (union over theta1, both polarisations):")
    for lo, hi in gap_edges(prob, args.lam_max):
        print(f"  ({lo:.10g}, {hi:.10g})")


if __name__ == "__main__":
    main()

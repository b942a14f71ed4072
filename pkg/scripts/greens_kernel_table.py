"""Tabulate the truncated Dirichlet and Neumann slab kernels against the mode count.

For a fixed source and target the printed differences between consecutive
truncations show the exponential decay of the evanescent tail.
"""

import argparse

import numpy as np

from slabcgo.slab_greens import ModeSpec, phi_dirichlet, psi_neumann, tail_bound


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--k", type=float, default=4.0)
    parser.add_argument("--L", type=float, default=1.0)
    parser.add_argument("--r", type=float, default=0.1, help="transverse separation")
    args = parser.parse_args(argv)
    x = np.array([args.r, 0.0, 0.3 * args.L])
    y = np.array([0.0, 0.0, 0.6 * args.L])
    prev = None
    print(f"{'M':>4} {'|G_D|':>12} {'|G_N|':>12} {'change D':>10} {'change N':>10} {'tail bound':>11}")
    for M in (5, 10, 20, 40, 80):
        spec = ModeSpec(args.k, args.L, M)
        d, n = complex(phi_dirichlet(x, y, spec)), complex(psi_neumann(x, y, spec))
        dd, dn = ("", "") if prev is None else (f"{abs(d - prev[0]):.2e}", f"{abs(n - prev[1]):.2e}")
        print(f"{M:4d} {abs(d):12.6e} {abs(n):12.6e} {dd:>10} {dn:>10} {tail_bound(args.r, spec):11.2e}")
        prev = (d, n)

if __name__ == "__main__":
    main()

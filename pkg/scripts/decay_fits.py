"""Tail exponents of U and of the interaction kernel against 1 + 2s."""

import argparse

import numpy as np

from fracgm.artifacts import write_table
from fracgm.ground_state import cached_ground_state, interaction_kernel
from fracgm.spectral import fit_decay_exponent, fit_power_law


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, nargs="+", default=[0.6, 0.75, 0.9])
    ap.add_argument("--n", type=int, default=2 ** 14)
    ap.add_argument("--L", type=float, default=200.0)
    ap.add_argument("--out", default="decay_fits.csv")
    args = ap.parse_args()
    rows = []
    for s in args.s:
        gs = cached_ground_state(s, args.n, args.L)
        p_u, c_u = fit_decay_exponent(gs.field, (args.L / 8, args.L / 4))
        z = np.linspace(args.L / 10, args.L / 2.5, 13)
        p_d, _ = fit_power_law(z, interaction_kernel(gs, z))
        rows.append([s, 1 + 2 * s, p_u, c_u, gs.tail_coeff, p_d])
        print(f"s={s}: U exponent {p_u:.4f}, delta exponent {p_d:.4f}, target {1 + 2 * s:.4f}")
    write_table(args.out, ["s", "target", "u_exponent", "u_fit_coeff", "tail_coeff", "delta_exponent"], rows)


if __name__ == "__main__":
    main()

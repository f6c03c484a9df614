"""Reduced-energy minimizers for m = 1..M spikes per half line."""

import argparse

from fracgm.artifacts import write_table
from fracgm.ground_state import cached_ground_state
from fracgm.params import FracParams
from fracgm.reduced import calibrate_constants, minimize_xi, rescale_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", type=float, default=0.75)
    ap.add_argument("--eps", type=float, default=0.02)
    ap.add_argument("--max-m", type=int, default=3)
    ap.add_argument("--eta", type=float, default=0.05)
    ap.add_argument("--odd", action="store_true")
    ap.add_argument("--out", default="minimizers.csv")
    args = ap.parse_args()
    gs = cached_ground_state(args.s, 2 ** 14, max(500.0, 10.0 / args.eps))
    rows = []
    for m in range(1, args.max_m + 1):
        k = 2 * m + int(args.odd)
        p = FracParams.from_ground_state(gs, args.eps, k)
        cfg, rep = minimize_xi(p, calibrate_constants(gs, p), m, args.eta,
                               parity="odd_k" if args.odd else "even_k")
        d = rescale_config(cfg, p)
        rows.append([m, k, rep.xi, rep.relative_margin, " ".join(f"{v:.6f}" for v in d)])
        print(f"m={m}: d = {d.round(4).tolist()}, margin {rep.relative_margin:.1%}")
    write_table(args.out, ["m", "k", "xi", "relative_margin", "rescaled"], rows)


if __name__ == "__main__":
    main()

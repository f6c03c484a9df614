"""s x eps sweep of full solves with fitted scaling exponents (FGM_THREADS bounds the pool)."""

import argparse
from pathlib import Path

from fracgm.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", default="0.75")
    ap.add_argument("--eps", default="0.02,0.01,0.005")
    ap.add_argument("--out", type=Path, default=Path("eps_sweep"))
    args = ap.parse_args()
    raise SystemExit(cli(["sweep", "--s", args.s, "--eps", args.eps, "--auto-grid", "-o", str(args.out)]))


if __name__ == "__main__":
    main()

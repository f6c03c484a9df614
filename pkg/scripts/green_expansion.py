"""Green function against its small-x expansion for several s; one CLI run each."""

import argparse
from pathlib import Path

from fracgm.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", nargs="+", default=["0.5", "0.6", "0.75", "0.9"])
    ap.add_argument("--out", type=Path, default=Path("green_runs"))
    args = ap.parse_args()
    for s in args.s:
        status = cli(["green", "--s", s, "--x-min", "1e-4", "--x-max", "100", "--n-x", "121",
                      "--plots", "-o", str(args.out / f"s{s}")])
        if status:
            raise SystemExit(status)


if __name__ == "__main__":
    main()

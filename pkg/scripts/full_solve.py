"""One full steady-state solve through the CLI, then re-verification."""

import argparse
from pathlib import Path

from fracgm.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--s", default="0.75")
    ap.add_argument("--eps", default="0.02")
    ap.add_argument("--m", default="1")
    ap.add_argument("--out", type=Path, default=Path("solve_run"))
    args = ap.parse_args()
    common = ["--s", args.s, "--eps", args.eps, "--m", args.m, "--auto-grid"]
    status = cli(["solve", *common, "--plots", "-o", str(args.out)])
    if status == 0:
        status = cli(["verify", *common, "--input", str(args.out / "profile.csv"),
                      "-o", str(args.out / "verify")])
    raise SystemExit(status)


if __name__ == "__main__":
    main()

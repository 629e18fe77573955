"""Run the full scenario x method x seed grid and write the three summary tables.

    python scripts/reproduce_tables.py --seeds 0-19 --out results --jobs 1
"""

import argparse
import sys
from pathlib import Path

from idtrack import cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="0-19")
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    return cli.main(["compare", "--seeds", args.seeds, "--out", str(args.out), "--jobs", str(args.jobs)])


if __name__ == "__main__":
    sys.exit(main())

"""Per-seed Exp5 summary: target-correct fraction and final robot-target distance."""

import argparse

from idtrack.cli import METHOD_ORDER, parse_seeds
from idtrack.runner import RunConfig, final_target_distance, run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", default="0-19")
    args = ap.parse_args()
    print(f"{'seed':>4}  " + "  ".join(f"{m.label:>28}" for m in METHOD_ORDER))
    for seed in parse_seeds(args.seeds):
        cells = []
        for m in METHOD_ORDER:
            r = run(RunConfig("Exp5", m, seed))
            cells.append(f"{r.report.target_pct_correct:6.1f}% correct, {final_target_distance(r):4.1f} m")
        print(f"{seed:>4}  " + "  ".join(f"{c:>28}" for c in cells))


if __name__ == "__main__":
    main()

"""Sweep F_p monotonicity over (model, p, alpha) cells and print the verdict table."""

import argparse

from pcapflow import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--levels", type=int, default=40)
    ap.add_argument("--slack", type=float, default=1e-8)
    args = ap.parse_args()
    report = verify.run_experiment(
        {
            "experiment": "monotonicity_sweep",
            "num_levels": args.levels,
            "slack": args.slack,
            "out_prefix": "monotonicity",
        },
        args.out,
    )
    for line in report.summary_lines():
        print(line)
    return 0 if report.worst != "fail" else 1


if __name__ == "__main__":
    raise SystemExit(main())

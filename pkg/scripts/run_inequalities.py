"""Check the Minkowski bound, Hawking-mass behavior, and area growth on all builtin models."""

import argparse

from pcapflow import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    report = verify.run_experiment({"experiment": "inequalities", "out_prefix": "inequalities"}, args.out)
    for line in report.summary_lines():
        print(line)
    return 0 if report.worst != "fail" else 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Produce the p->1 and eps->0 convergence tables for the reference models."""

import argparse
import math

from pcapflow import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    args = ap.parse_args()
    ps = [1.2, 1.1, 1.05, 1.01]
    jobs = [
        {
            "experiment": "p_to_1",
            "model": {"name": "schwarzschild", "params": {"mass": 1.0}},
            "r0": 2.2,
            "R": 12.0,
            "p_list": ps,
            "out_prefix": "schwarzschild_p_to_1",
        },
        {
            "experiment": "p_to_1",
            "model": {"name": "euclidean", "params": {"n": 3}},
            "r0": 1.0,
            "R": 4.0,
            "p_list": ps,
            "phi_mode": "scale-invariant",
            "thresholds": {"sup_w": 8e-3},
            "expect_sup": [(p - 1.0) * math.log(2.0) for p in ps],
            "out_prefix": "euclidean_p_to_1",
        },
        {
            "experiment": "eps_to_0",
            "model": {"name": "euclidean", "params": {"n": 3}},
            "p": 1.5,
            "r0": 1.0,
            "R": 3.0,
            "eps_list": [1e-2, 1e-3, 1e-4],
            "out_prefix": "euclidean_eps_to_0",
        },
    ]
    status = 0
    for cfg in jobs:
        report = verify.run_experiment(cfg, args.out)
        for line in report.summary_lines():
            print(line)
        if report.worst == "fail":
            status = 1
    return status


if __name__ == "__main__":
    raise SystemExit(main())

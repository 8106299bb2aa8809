"""Experiment harness: verdict logic, report schema, config validation."""

import json
import math

import numpy as np
import pytest

from pcapflow import geometry, verify
from pcapflow.verify import (
    Check,
    ConfigError,
    Report,
    check_monotone,
    eps_to_0_suite,
    p_to_1_suite,
    run_experiment,
)


def fp_config(**overrides):
    cfg = {
        "experiment": "functional_series",
        "model": {"name": "euclidean", "params": {"n": 3}},
        "functional": "F_p",
        "p": 2.0,
        "alpha": 2.0,
        "phi_mode": "scale-invariant",
        "r0": 1.0,
        "R": 8.0,
        "t_grid": {"start": 0.0, "stop": 2.0, "num": 8},
        "expect": {"constant": -2.0 * math.pi, "rel_tol": 1e-8},
        "out_prefix": "smoke_fp",
    }
    cfg.update(overrides)
    return cfg


class TestCheckMonotone:
    def test_increasing_passes(self):
        verdict, violations = check_monotone([0.0, 1.0, 2.0])
        assert verdict == "pass" and violations == []

    def test_rounding_dip_within_slack(self):
        verdict, _ = check_monotone([0.0, -1e-12, 0.0])
        assert verdict == "pass"

    def test_real_dip_reported_with_index(self):
        verdict, violations = check_monotone([0.0, -1.0, 0.0])
        assert verdict == "fail"
        assert violations == [(0, -1.0)]

    def test_slack_scales_with_magnitude(self):
        verdict, _ = check_monotone([1e8, 1e8 - 1.0, 1e8])
        assert verdict == "pass"

    def test_needs_three_samples(self):
        with pytest.raises(ValueError):
            check_monotone([0.0, 1.0])


class TestCheckAndReport:
    def test_check_validation(self):
        with pytest.raises(ValueError):
            Check("x", "anchor", {}, None, "maybe")
        with pytest.raises(ValueError):
            Check("x", "", {}, None, "pass")

    def test_worst_ordering(self):
        ok = Check("a", "anc", {}, None, "pass")
        ng = Check("b", "anc", {}, None, "not-guaranteed")
        bad = Check("c", "anc", {}, None, "fail")
        assert Report("e", [ok]).worst == "pass"
        assert Report("e", [ok, ng]).worst == "not-guaranteed"
        assert Report("e", [ok, ng, bad]).worst == "fail"

    def test_schema_and_nonfinite_serialization(self, tmp_path):
        chk = Check("a", "anc", {"x": math.inf, "arr": np.arange(3.0)}, 1e-8, "pass")
        rep = Report("smoke", [chk])
        path = tmp_path / "report.json"
        rep.write(path)
        data = json.loads(path.read_text())
        assert set(data) == {"experiment", "checks", "environment"}
        assert data["checks"][0]["values"]["x"] == "inf"
        assert data["checks"][0]["values"]["arr"] == [0.0, 1.0, 2.0]
        assert "version" in data["environment"]

    def test_summary_lines(self):
        rep = Report("smoke", [Check("a", "anc", {}, None, "pass")])
        lines = rep.summary_lines()
        assert lines[0] == "experiment: smoke"
        assert lines[-1] == "overall: pass"
        assert any("PASS" in ln for ln in lines)


class TestRunExperiment:
    def test_functional_series_passes(self, tmp_path):
        report = run_experiment(fp_config(), tmp_path)
        assert report.worst == "pass"
        assert all(c.anchor for c in report.checks)
        assert (tmp_path / "smoke_fp_F_p.csv").exists() or any(
            f.suffix == ".csv" for f in tmp_path.iterdir()
        )

    def test_deterministic_artifacts(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run_experiment(fp_config(), a)
        run_experiment(fp_config(), b)
        csvs_a = sorted(f.name for f in a.iterdir() if f.suffix == ".csv")
        csvs_b = sorted(f.name for f in b.iterdir() if f.suffix == ".csv")
        assert csvs_a and csvs_a == csvs_b
        for name in csvs_a:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_failed_expectation_reported(self, tmp_path):
        cfg = fp_config(expect={"constant": -6.0, "rel_tol": 1e-8})
        report = run_experiment(cfg, tmp_path)
        assert report.worst == "fail"

    def test_unknown_experiment(self, tmp_path):
        with pytest.raises(ConfigError):
            run_experiment({"experiment": "warp-drive"}, tmp_path)

    def test_missing_key(self, tmp_path):
        cfg = fp_config()
        del cfg["p"]
        with pytest.raises(ConfigError):
            run_experiment(cfg, tmp_path)

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            run_experiment(fp_config(typo_key=1), tmp_path)

    def test_bad_model_name(self, tmp_path):
        cfg = fp_config(model={"name": "torus", "params": {}})
        with pytest.raises(ConfigError):
            run_experiment(cfg, tmp_path)

    def test_t_grid_must_be_mapping(self, tmp_path):
        cfg = fp_config(t_grid=[0.0, 2.0, 8])
        with pytest.raises(ConfigError):
            run_experiment(cfg, tmp_path)

    def test_unknown_threshold_keys(self, tmp_path):
        cfg = {
            "experiment": "eps_to_0",
            "model": {"name": "euclidean", "params": {"n": 3}},
            "p": 1.5,
            "r0": 1.0,
            "R": 3.0,
            "eps_list": [1e-2, 1e-3],
            "thresholds": {"sup_w": 1e-4, "bogus": 1.0},
        }
        with pytest.raises(ConfigError, match="threshold"):
            run_experiment(cfg, tmp_path)


class TestSuites:
    def test_p_to_1_smoke(self, euclid3):
        # short p list: loosen the final-value gates (they are calibrated
        # for sweeps reaching p = 1.01) and keep only the shape assertions
        loose = {k: 10.0 for k in ("sup_w", "l2_grad", "l4_grad", "cap_gap", "h_defect", "area_defect")}
        report = p_to_1_suite(
            euclid3, 1.0, 4.0, [1.4, 1.2, 1.1], phi_mode="scale-invariant", thresholds=loose
        )
        assert all(c.anchor for c in report.checks)
        assert report.worst == "pass"
        # sup column is the analytic (p-1) ln 2 for the scale-invariant datum
        sup = next(c for c in report.checks if c.name == "p-to-1 sup_w")
        finals = sup.values["sup_w"]
        assert finals[-1] == pytest.approx(0.1 * math.log(2.0), rel=1e-6)

    def test_p_list_validation(self, euclid3):
        with pytest.raises(ConfigError):
            p_to_1_suite(euclid3, 1.0, 4.0, [1.5])
        with pytest.raises(ConfigError):
            p_to_1_suite(euclid3, 1.0, 4.0, [1.5, 0.9])

    def test_eps_to_0_smoke(self, euclid3):
        report = eps_to_0_suite(euclid3, 1.0, 3.0, 1.5, [1e-2, 3e-3, 1e-3])
        assert all(c.anchor for c in report.checks)
        sup = next(c for c in report.checks if c.name.startswith("eps-to-0 sup|"))
        vals = sup.values["sup_w"]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_eps_list_validation(self, euclid3):
        with pytest.raises(ConfigError):
            eps_to_0_suite(euclid3, 1.0, 3.0, 1.5, [1e-3, 1e-2])

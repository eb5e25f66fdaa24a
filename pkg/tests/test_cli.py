"""Config validation, pipeline exit codes, report determinism."""

import json

import pytest

from movingframes.cli import (ConfigError, load_config, load_config_file,
                              main, run_pipeline, serialize_report)


def screw_config(**overrides):
    cfg = {
        "schema_version": "1",
        "chart": {
            "coordinates": ["x", "y", "z"],
            "domain": {"x": [0.4, 1.6], "y": [-0.6, 0.6], "z": [-1.0, 1.0]},
        },
        "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "flow": ["-y", "x", "1"],
        "samples": {"mode": "random", "count": 20, "seed": 42},
        "tasks": ["curvature", "classify", "flow", "herglotz", "ricci-flat"],
        "basepoint": [1.0, 0.0, 0.0],
    }
    cfg.update(overrides)
    return cfg


def twist_config():
    return {
        "schema_version": "1",
        "chart": {
            "coordinates": ["x", "y", "z"],
            "domain": {"x": [-1.0, 1.0], "y": [-1.0, 1.0], "z": [0.2, 1.2]},
        },
        "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "flow": ["cos(z)", "sin(z)", "0"],
        "samples": {"mode": "random", "count": 15, "seed": 7},
        "tasks": ["flow"],
    }


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestConfigValidation:
    def test_valid(self):
        cfg = load_config(screw_config())
        assert cfg.tasks[-1] == "ricci-flat"
        assert cfg.seed == 42

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(extra_field=1))

    def test_random_needs_seed(self):
        with pytest.raises(ConfigError, match="seed"):
            load_config(screw_config(samples={"mode": "random", "count": 5}))

    def test_metric_shape(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(metric=[["1", "0"], ["0", "1"]]))

    def test_metric_expression_error(self):
        bad = screw_config()
        bad["metric"][0][0] = "1 +"
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_asymmetric_metric(self):
        bad = screw_config()
        bad["metric"][0][1] = "x"
        with pytest.raises(ConfigError):
            load_config(bad)

    def test_flow_required_for_flow_tasks(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(flow=None))

    def test_basepoint_required_for_herglotz(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(basepoint=None))

    def test_basepoint_inside_domain(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(basepoint=[5.0, 0.0, 0.0]))

    def test_unknown_task(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(tasks=["curvature", "frobnicate"]))

    def test_unknown_tolerance(self):
        with pytest.raises(ConfigError):
            load_config(screw_config(tolerances={"bogus": 1e-3}))

    def test_malformed_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"chart": ')
        with pytest.raises(ConfigError, match="malformed"):
            load_config_file(str(path))


class TestPipeline:
    def test_screw_all_tasks(self):
        report, code = run_pipeline(load_config(screw_config()))
        assert code == 0
        assert report["all_passed"]
        assert report["tasks"]["herglotz"]["verdict"] == "isometric-verified"
        assert report["tasks"]["classify"]["flat"] is True
        assert report["tasks"]["ricci-flat"]["applicable"] is True
        names = {(c["task"], c["name"]): c for c in report["checks"]}
        assert names[("flow", "rigidity")]["status"] == "pass"

    def test_twist_fails_rigidity(self):
        report, code = run_pipeline(load_config(twist_config()))
        assert code == 1
        assert not report["all_passed"]
        flow = report["tasks"]["flow"]
        assert flow["rigid"] is False
        assert flow["rigidity_residual"] == pytest.approx(1.0, abs=1e-8)
        assert "advisory" in flow
        statuses = {c["name"]: c["status"] for c in report["checks"]}
        assert statuses["rigidity"] == "fail"
        assert statuses["two_path_consistency"] == "advisory"

    def test_rotation_herglotz_not_met(self):
        cfg = screw_config(flow=["-y", "x", "0"],
                           chart={"coordinates": ["x", "y", "z"],
                                  "domain": {"x": [0.5, 1.8], "y": [-0.4, 0.4],
                                             "z": [-1.0, 1.0]}})
        report, code = run_pipeline(load_config(cfg))
        assert code == 1  # the requested herglotz check could not pass
        h = report["tasks"]["herglotz"]
        assert h["verdict"] == "hypotheses-not-met"
        assert "non-rotational" in h["reason"]
        assert report["tasks"]["flow"]["rigid"] is True
        # M vanishes identically for the normalized rotation field
        statuses = {c["name"]: c["status"] for c in report["checks"]}
        assert statuses["rigidity"] == "pass"
        assert statuses["herglotz_verdict"] == "fail"

    def test_report_roundtrip(self):
        report, _ = run_pipeline(load_config(screw_config()))
        text = serialize_report(report)
        assert json.loads(text) == json.loads(serialize_report(json.loads(text)))

    def test_determinism(self):
        r1, _ = run_pipeline(load_config(screw_config()))
        r2, _ = run_pipeline(load_config(screw_config()))
        assert serialize_report(r1) == serialize_report(r2)

    def test_grid_mode_no_seed(self):
        cfg = screw_config(samples={"mode": "grid", "count": 16},
                           tasks=["curvature", "classify"])
        report, code = run_pipeline(load_config(cfg))
        assert code == 0

    def test_exclusions_through_pipeline(self):
        """Rotation flow with the axis carved out by an exclusion predicate."""
        cfg = {
            "schema_version": "1",
            "chart": {
                "coordinates": ["x", "y", "z"],
                "domain": {"x": [-1.5, 1.5], "y": [-1.5, 1.5], "z": [-1.0, 1.0]},
                "exclusions": ["x^2 < 0.25"],
            },
            "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
            "flow": ["-y", "x", "0"],
            "samples": {"mode": "random", "count": 25, "seed": 13},
            "tasks": ["flow", "herglotz"],
            "basepoint": [1.0, 0.0, 0.0],
        }
        report, code = run_pipeline(load_config(cfg))
        assert code == 1  # rigid but non-rotational: theorem inapplicable
        assert report["tasks"]["flow"]["rigid"] is True
        assert report["tasks"]["herglotz"]["verdict"] == "hypotheses-not-met"
        assert report["tasks"]["flow"]["flow_normalized"] is True


class TestCommandLine:
    def test_validate_ok(self, tmp_path, capsys):
        path = write(tmp_path, "cfg.json", screw_config())
        assert main(["validate", "--config", path]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_validate_truncated_json(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text('{"chart": {"coordinates": ["x", "y"]')
        assert main(["validate", "--config", str(path)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_run_writes_report(self, tmp_path):
        path = write(tmp_path, "cfg.json", screw_config(tasks=["curvature", "classify"]))
        out = tmp_path / "report.json"
        assert main(["run", "--config", path, "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["tool"]["name"] == "movingframes"
        assert len(report["tool"]["conventions_sha256"]) == 64

    def test_run_text_format(self, tmp_path, capsys):
        path = write(tmp_path, "cfg.json", screw_config(tasks=["classify"]))
        assert main(["run", "--config", path, "--format", "text"]) == 0
        out = capsys.readouterr().out
        assert "all checks passed" in out

    def test_twist_exit_code(self, tmp_path):
        path = write(tmp_path, "cfg.json", twist_config())
        out = tmp_path / "report.json"
        assert main(["run", "--config", path, "--out", str(out)]) == 1

    def test_singular_metric_exit_two(self, tmp_path, capsys):
        cfg = screw_config(metric=[["1", "0", "0"], ["0", "0", "0"], ["0", "0", "1"]],
                           tasks=["curvature"])
        path = write(tmp_path, "cfg.json", cfg)
        assert main(["run", "--config", path]) == 2
        err = capsys.readouterr().err
        assert "input error" in err and "point" in err

    def test_vanishing_flow_exit_two(self, tmp_path, capsys):
        cfg = screw_config(flow=["0", "0", "0"], tasks=["flow"])
        path = write(tmp_path, "cfg.json", cfg)
        assert main(["run", "--config", path]) == 2
        assert "point" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["run", "--config", "/nonexistent/cfg.json"]) == 2

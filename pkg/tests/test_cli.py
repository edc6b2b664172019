"""Tests for the command-line interface."""

import base64
import json
import math

import numpy as np
import pytest

from ellipflow.cli import RunConfig, run
from ellipflow.errors import ValidationError

RATIONAL_CONFIG = "configs/rational_two_triple_points.json"
TORUS_CONFIG = "configs/torus_wp_quadratic.json"

SQUARE_LATTICE = {"v": 1, "kind": "lattice",
                  "omega1": [1.0, 0.0], "omega2": [0.0, 1.0]}
E1 = 6.8751858180204

# the rational family endpoint: exact rational coordinates
RATIONAL_END = {"a1": 17 / 16 + 5j / 16, "a2": -1 / 16 + 11j / 16,
                "b1": 1 / 2 + 1j / 2}


def write_json(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestLatticeInfo:
    def test_square_lattice(self, tmp_path, capsys):
        cfg = write_json(tmp_path, SQUARE_LATTICE)
        code, doc = run_json(capsys, ["lattice-info", "--config", cfg])
        assert code == 0
        assert doc["kind"] == "lattice-info" and doc["v"] == 1
        assert doc["e1"][0] == pytest.approx(E1, abs=1e-10)
        assert abs(complex(*doc["g3"])) < 1e-10
        assert doc["eta1"][0] == pytest.approx(math.pi, abs=1e-10)

    def test_wrong_kind(self, tmp_path, capsys):
        cfg = write_json(tmp_path, {**SQUARE_LATTICE, "kind": "eval"})
        code = run(["lattice-info", "--config", cfg])
        err = capsys.readouterr().err
        assert code == 1 and err.startswith("SchemaError")

    def test_requires_config(self, capsys):
        code = run(["lattice-info"])
        err = capsys.readouterr().err
        assert code == 1 and err.startswith("ValidationError")


class TestEval:
    def test_wp_at_half_periods(self, tmp_path, capsys):
        cfg = write_json(tmp_path, {
            "v": 1, "kind": "eval", "omega1": [1.0, 0.0],
            "omega2": [0.0, 1.0], "function": "wp",
            "points": [[0.5, 0.0], [0.0, 0.5]]})
        code, doc = run_json(capsys, ["eval", "--config", cfg])
        assert code == 0
        assert doc["values"][0][0] == pytest.approx(E1, abs=1e-9)
        assert doc["values"][1][0] == pytest.approx(-E1, abs=1e-9)

    def test_unknown_function(self, tmp_path, capsys):
        cfg = write_json(tmp_path, {
            "v": 1, "kind": "eval", "omega1": [1.0, 0.0],
            "omega2": [0.0, 1.0], "function": "airy", "points": []})
        code = run(["eval", "--config", cfg])
        assert code == 1
        assert capsys.readouterr().err.startswith("SchemaError")


class TestSolveCommands:
    def test_rational_solve_csv_endpoint(self, capsys):
        code = run(["rational-solve", "--config", RATIONAL_CONFIG,
                    "--format", "csv", "--checkpoints", "0,1"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().split("\n")
        assert len(lines) == 3
        cells = [float(v) for v in lines[-1].split(",")]
        for i, key in enumerate(("a1", "a2", "b1")):
            z = RATIONAL_END[key]
            assert cells[1 + 2 * i] == pytest.approx(z.real, abs=1e-9)
            assert cells[2 + 2 * i] == pytest.approx(z.imag, abs=1e-9)

    def test_torus_solve_json_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "traj.json"
        code = run(["torus-solve", "--config", TORUS_CONFIG,
                    "--out", str(out_path), "--checkpoints", "0,0.5,1"])
        assert code == 0
        assert capsys.readouterr().out == ""
        doc = json.loads(out_path.read_text())
        assert doc["kind"] == "torus-trajectory"
        assert len(doc["checkpoints"]) == 3
        assert doc["columns"] == ["a_1", "a_2", "a_3", "a_4",
                                  "a_0", "c", "omega2"]

    def test_bad_checkpoints_rejected(self, capsys):
        code = run(["rational-solve", "--config", RATIONAL_CONFIG,
                    "--checkpoints", "0,2"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ValidationError")


class TestVerify:
    def test_rational_verify_ok(self, capsys):
        code, doc = run_json(capsys, ["verify", "--config", RATIONAL_CONFIG,
                                      "--tol", "1e-6"])
        assert code == 0
        assert doc["ok"] is True
        assert doc["max_error"] < 1e-9
        assert len(doc["errors"]) == 2

    def test_torus_verify_ok(self, capsys):
        code, doc = run_json(capsys, ["verify", "--config", TORUS_CONFIG,
                                      "--tol", "1e-6"])
        assert code == 0
        assert doc["ok"] is True
        assert len(doc["errors"]) == 4

    def test_verify_unreachable_tol_exits_nonzero(self, capsys):
        code, doc = run_json(capsys, ["verify", "--config", RATIONAL_CONFIG,
                                      "--tol", "1e-20"])
        assert code == 1
        assert doc["ok"] is False


class TestNuttallCommands:
    def test_threshold(self, capsys):
        code, doc = run_json(capsys, ["nuttall-threshold"])
        assert code == 0
        assert doc["alpha_star"] == pytest.approx(math.sqrt(3) / 3,
                                                  abs=1e-8)

    def test_critical_points(self, capsys):
        code, doc = run_json(capsys, ["nuttall-critical", "--alpha", "0.6"])
        assert code == 0
        pts = [complex(*p) for p in doc["points"]]
        assert sorted(p.real for p in pts) == pytest.approx(
            [0.4711764234, 0.6608743841], abs=1e-6)
        assert doc["psi"] < 0

    def test_partition_json(self, capsys):
        code, doc = run_json(capsys, ["nuttall-partition", "--alpha", "0.5",
                                      "--grid", "64"])
        assert code == 0
        assert doc["kind"] == "sheet-field"
        labels = np.frombuffer(base64.b64decode(doc["labels_b64"]),
                               dtype=np.uint8)
        assert labels.shape == (64 * 64,)
        assert set(np.unique(labels)) <= {0, 1, 2}

    def test_partition_svg(self, tmp_path, capsys):
        out_path = tmp_path / "field.svg"
        code = run(["nuttall-partition", "--alpha", "0.5", "--grid", "48",
                    "--format", "svg", "--out", str(out_path)])
        assert code == 0
        text = out_path.read_text()
        assert text.startswith("<svg ") and "<polyline" in text

    def test_partition_requires_alpha(self, capsys):
        code = run(["nuttall-partition"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ValidationError")

    def test_alpha_out_of_range(self, capsys):
        code = run(["nuttall-critical", "--alpha", "0.9"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ValidationError")


class TestErrorSurface:
    def test_missing_config_file(self, capsys):
        code = run(["rational-solve", "--config", "/no/such/file.json"])
        assert code == 1
        assert capsys.readouterr().err.startswith("IoError")

    def test_malformed_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{oops")
        code = run(["rational-solve", "--config", str(path)])
        assert code == 1
        assert capsys.readouterr().err.startswith("ParseError")

    def test_negative_tolerance(self, capsys):
        code = run(["verify", "--config", RATIONAL_CONFIG, "--tol", "-1"])
        assert code == 1
        assert capsys.readouterr().err.startswith("ValidationError")

    def test_unknown_command_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_format_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            run(["rational-solve", "--config", RATIONAL_CONFIG,
                 "--format", "yaml"])
        assert exc.value.code == 2


class TestRunConfig:
    def test_validates_fields(self):
        with pytest.raises(ValidationError):
            RunConfig(command="unknown")
        with pytest.raises(ValidationError):
            RunConfig(command="eval", tol=0.0)
        with pytest.raises(ValidationError):
            RunConfig(command="eval", grid=1)
        with pytest.raises(ValidationError):
            RunConfig(command="eval", checkpoints=(0.0, 1.5))
        cfg = RunConfig(command="eval")
        assert cfg.fmt == "json" and cfg.grid == 400

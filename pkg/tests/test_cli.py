import json
from pathlib import Path

import numpy as np
import pytest

from gaugemech import cli, liealg


def run(args):
    return cli.main(args)


def small_verify_scenario(tmp_path, group_doc=None):
    doc = {
        "name": "tiny",
        "kind": "verify",
        "seed": 99,
        "group": group_doc if group_doc is not None else "so3",
        "bundle": {
            "kind": "TrivialProduct",
            "group": group_doc if group_doc is not None else "so3",
            "base_box": [[-1.0, 1.0], [-1.0, 1.0]],
            "connection": {"A": [[[], [[-0.2, [0, 1]]], []], [[[0.3, [1, 0]]], [], []]]},
        },
        "suites": ["liealg.validate", "bundle.action", "bundle.momentum"],
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(doc))
    return path


class TestVerify:
    def test_builtin_scenario_passes(self, tmp_path):
        code = run(["verify", "se3-verify", "--out", str(tmp_path)])
        assert code == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["pass"] is True
        assert report["failures"] == []

    def test_scenario_file(self, tmp_path):
        path = small_verify_scenario(tmp_path)
        assert run(["verify", str(path), "--out", str(tmp_path / "out")]) == cli.EXIT_PASS

    def test_corrupted_structure_constants_exit_1(self, tmp_path):
        doc = liealg.spec_to_json(liealg.so3())
        doc["structure"] = [[i, j, k, 0.7 * c] for i, j, k, c in doc["structure"][:3]] + doc["structure"][3:]
        path = small_verify_scenario(tmp_path, group_doc=doc)
        code = run(["verify", str(path), "--out", str(tmp_path / "out")])
        assert code == cli.EXIT_CHECK_FAILURE
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["pass"] is False
        assert any("antisymmetry" in f or "structure_vs_commutator" in f for f in report["failures"])

    def test_missing_scenario_exit_2(self, tmp_path):
        assert run(["verify", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == cli.EXIT_CONFIG_ERROR

    def test_missing_group_file_exit_2(self, tmp_path):
        doc = {
            "name": "broken-ref",
            "kind": "verify",
            "seed": 1,
            "group": "no-such-file.json",
            "suites": ["liealg.validate"],
        }
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(doc))
        assert run(["verify", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG_ERROR

    def test_unknown_suite_exit_2(self, tmp_path):
        doc = {"name": "x", "kind": "verify", "seed": 1, "group": "so3", "suites": ["frobnicate"]}
        path = tmp_path / "x.json"
        path.write_text(json.dumps(doc))
        assert run(["verify", str(path), "--out", str(tmp_path)]) == cli.EXIT_CONFIG_ERROR

    def test_tol_scale_loosens(self, tmp_path):
        doc = liealg.spec_to_json(liealg.so3())
        doc["structure"] = [[i, j, k, c + 1e-9] for i, j, k, c in doc["structure"]]
        path = small_verify_scenario(tmp_path, group_doc=doc)
        assert run(["verify", str(path), "--out", str(tmp_path / "a")]) == cli.EXIT_CHECK_FAILURE
        assert run(["verify", str(path), "--tol-scale", "1e6", "--out", str(tmp_path / "b")]) == cli.EXIT_PASS


class TestLeaves:
    def test_so3_leaves(self, tmp_path):
        assert run(["leaves", "so3-leaves", "--out", str(tmp_path)]) == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["orbit_dim"] == 2
        assert report["leaf_dim"] == 6
        assert (tmp_path / "leaf_points.csv").exists()

    def test_zero_orbit(self, tmp_path):
        assert run(["leaves", "so3-zero-leaf", "--out", str(tmp_path)]) == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["orbit_dim"] == 0
        assert report["leaf_dim"] == 4  # J^{-1}(0)/G = T*(P/G)

    def test_u1_magnetic_reports_closedness(self, tmp_path):
        assert run(["leaves", "u1-magnetic", "--out", str(tmp_path)]) == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert "magnetic_closedness_residual" in report


class TestSimulate:
    def test_heavy_top_lagrange(self, tmp_path):
        assert run(["simulate", "heavy-top-lagrange", "--out", str(tmp_path)]) == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["drift"]["Pi3"] <= 1e-6
        assert 12.0 <= report["convergence"]["ratio"] <= 20.0
        header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
        assert header.startswith("time,x1")
        assert "Pi3" in header
        assert (tmp_path / "trajectory.meta.json").exists()

    def test_free_top_flat_momentum_norm(self, tmp_path):
        assert run(["simulate", "heavy-top-free", "--out", str(tmp_path)]) == cli.EXIT_PASS
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["drift"]["|Pi|^2"] <= 1e-6

    def test_divergent_scenario_exit_3(self, tmp_path):
        doc = {
            "name": "blowup",
            "kind": "simulate",
            "seed": 5,
            "simulate": {
                "model": "heavy_top",
                "inertia": [1e-9, 2e-9, 3e-9],
                "mgl": 1e9,
                "axis": [0.0, 0.0, 1.0],
                "x0": [1e6, 2e6, -1e6, 1e6, 1e6, 1e6],
                "h": 1e3,
                "n_steps": 2000,
            },
        }
        path = tmp_path / "blowup.json"
        path.write_text(json.dumps(doc))
        with np.errstate(over="ignore", invalid="ignore"):
            code = run(["simulate", str(path), "--out", str(tmp_path / "out")])
        assert code == cli.EXIT_DIVERGENCE
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["divergence_step"] >= 1


class TestDeterminism:
    def test_repeated_runs_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["verify", "heisenberg-verify", "--out", str(out)]) == cli.EXIT_PASS
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_seed_override_changes_report(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["verify", "heisenberg-verify", "--out", str(a)])
        run(["verify", "heisenberg-verify", "--seed", "123", "--out", str(b)])
        ra = json.loads((a / "report.json").read_text())
        rb = json.loads((b / "report.json").read_text())
        assert ra["seed"] != rb["seed"]

    def test_list_builtins(self, capsys):
        assert run(["--list-builtins"]) == cli.EXIT_PASS
        out = capsys.readouterr().out
        for name in ("so3-trivial-bundle", "heavy-top-lagrange", "u1-magnetic"):
            assert name in out

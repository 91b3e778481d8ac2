"""Tests for the blendnet command line."""

import json

import pytest

from blendnet.cli import EXIT_CODES, exit_code, main
from blendnet.network_core.errors import (
    ConvergenceError,
    InfeasibleNetworkError,
    NetworkDataError,
    TopologyError,
    UnknownIdError,
)
from blendnet.utilities.generate_networks import random_tree
from blendnet.utilities.network_io import REPORT_FORMAT, dump_network
from tests.conftest import DIAMOND_FILE, SINGLE_CYCLE_FILE


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _pair(load_b=1, friction=1e-6, anchor=10):
    return {
        "nodes": [
            {"id": "a", "load": -1, "zeta": 0.5, "pressure_anchor": anchor},
            {"id": "b", "load": load_b},
        ],
        "edges": [
            {"id": "e0", "foot": "a", "head": "b", "length": 1, "friction": friction}
        ],
    }


class TestExitCodes:
    @pytest.mark.parametrize(
        "error, code",
        [
            (NetworkDataError("bad", parse_error=True), 2),
            (NetworkDataError("bad"), 1),
            (InfeasibleNetworkError("low"), 3),
            (ConvergenceError("slow"), 4),
            (UnknownIdError("edge", "x"), 2),
            (FileNotFoundError("gone"), 2),
            (TopologyError("shape"), 1),
        ],
    )
    def test_mapping(self, error, code) -> None:
        assert exit_code(error) == code

    def test_codes_are_stable(self) -> None:
        assert list(EXIT_CODES.values()) == [0, 1, 2, 3, 4]


class TestValidate:
    def test_valid(self, capsys) -> None:
        assert main(["validate", str(SINGLE_CYCLE_FILE)]) == 0
        assert capsys.readouterr().out.startswith("ok: Network(nodes=8")

    def test_violations_listed(self, tmp_path, capsys) -> None:
        path = _write(tmp_path, "net.json", _pair(load_b=2))
        assert main(["validate", path]) == 1
        out = capsys.readouterr().out
        assert out.strip() == "load-balance: loads do not sum to zero (sum = 1.0)"

    def test_malformed(self, tmp_path, capsys) -> None:
        path = tmp_path / "net.json"
        path.write_text("{", encoding="utf-8")
        assert main(["validate", str(path)]) == 2
        assert "blendnet: error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path) -> None:
        assert main(["validate", str(tmp_path / "none.json")]) == 2


class TestSolve:
    def test_tree(self, tmp_path, capsys) -> None:
        path = tmp_path / "tree.json"
        dump_network(random_tree(6, seed=4), path)
        assert main(["solve", str(path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["format"] == REPORT_FORMAT
        assert report["solver_used"] == "tree"
        assert report["iterations"] == 0
        assert report["residual_max"] < 1e-8
        assert set(report["solution"]["q"]) == {f"e{i}" for i in range(5)}

    def test_single_cycle_report(self, capsys) -> None:
        assert main(["solve", str(SINGLE_CYCLE_FILE)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["solver_used"] == "cut"
        assert report["cut_edge"] == "e0"
        assert -6.0 < report["lambda_star"] < -2.0
        assert report["solution"]["q"]["e0"] == report["lambda_star"]
        assert report["warnings"] == []
        assert set(report["critical_lengths"]) == {f"e{i}" for i in range(8)}

    def test_report_file(self, tmp_path, capsys) -> None:
        out = tmp_path / "report.json"
        argv = ["solve", str(SINGLE_CYCLE_FILE), "--cut-edge", "e2", "--out", str(out)]
        assert main(argv) == 0
        assert capsys.readouterr().out == ""
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["cut_edge"] == "e2"

    def test_two_cycles_use_lm(self, capsys) -> None:
        assert main(["solve", str(DIAMOND_FILE)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["solver_used"] == "lm"
        assert "lambda_star" not in report

    def test_infeasible(self, tmp_path, capsys) -> None:
        path = _write(tmp_path, "net.json", _pair(friction=0.01, anchor=1))
        assert main(["solve", path]) == 3
        err = capsys.readouterr().err
        assert "edge 'e0'" in err
        assert "critical length" in err

    def test_wrong_solver_for_topology(self, capsys) -> None:
        assert main(["solve", str(SINGLE_CYCLE_FILE), "--solver", "tree"]) == 1
        assert "not a tree" in capsys.readouterr().err

    def test_not_converged(self) -> None:
        argv = ["solve", str(SINGLE_CYCLE_FILE), "--solver", "lm", "--max-iter", "1"]
        assert main(argv) == 4

    def test_unknown_cut_edge(self) -> None:
        assert main(["solve", str(SINGLE_CYCLE_FILE), "--cut-edge", "e99"]) == 2

    def test_unknown_solver(self) -> None:
        with pytest.raises(SystemExit) as info:
            main(["solve", str(SINGLE_CYCLE_FILE), "--solver", "newton"])
        assert info.value.code == 2


class TestSweep:
    def test_artifacts(self, tmp_path, capsys) -> None:
        prefix = str(tmp_path / "single_cycle")
        argv = [
            "sweep",
            str(SINGLE_CYCLE_FILE),
            "--out",
            prefix,
            "--n-lambda",
            "3",
            "--n-mu",
            "2",
        ]
        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "6/6 grid points converged" in out
        assert "lambda* in [-6, -2]" in out
        grid_lines = (tmp_path / "single_cycle_grid.csv").read_text().splitlines()
        assert grid_lines[0] == "lambda,mu,Hp,Heta,status"
        assert len(grid_lines) == 7
        grid = json.loads((tmp_path / "single_cycle_grid.json").read_text())
        assert grid["lambda"] == [-6.0, -2.0, 2.0]
        root = (tmp_path / "single_cycle_root_curve.csv").read_text().splitlines()
        assert root[0] == "lambda,mu_eta,status"
        g_curve = (tmp_path / "single_cycle_g.csv").read_text().splitlines()
        assert g_curve[0] == "lambda,g,status"
        assert len(g_curve) == 4

    def test_grid_too_small(self, tmp_path) -> None:
        argv = ["sweep", str(SINGLE_CYCLE_FILE), "--out", str(tmp_path / "x")]
        with pytest.raises(SystemExit) as info:
            main(argv + ["--n-lambda", "1"])
        assert info.value.code == 2

    def test_tree_has_nothing_to_cut(self, tmp_path, capsys) -> None:
        path = _write(tmp_path, "net.json", _pair())
        assert main(["sweep", path, "--out", str(tmp_path / "x")]) == 1
        assert "no cycle" in capsys.readouterr().err


class TestCurves:
    def test_root_curve_to_stdout(self, capsys) -> None:
        assert main(["root-curve", str(SINGLE_CYCLE_FILE), "--n-lambda", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "lambda,mu_eta,status"
        assert lines[1] == "-6.0,0.5,converged"
        assert lines[3] == "2.0,0.5,converged"

    def test_g_curve_to_file(self, tmp_path) -> None:
        out = tmp_path / "g.csv"
        argv = [
            "g-curve",
            str(SINGLE_CYCLE_FILE),
            "--lambda-range",
            "-3",
            "-1",
            "--n-lambda",
            "2",
            "--out",
            str(out),
        ]
        assert main(argv) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        first, second = (float(line.split(",")[1]) for line in lines[1:])
        assert first < 0.0 < second

    def test_raw_load_bound_on_tree_cut(self, capsys) -> None:
        argv = ["root-curve", str(SINGLE_CYCLE_FILE), "--n-lambda", "2"]
        argv.append("--raw-load-bound")
        assert main(argv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].startswith("-6.0,")

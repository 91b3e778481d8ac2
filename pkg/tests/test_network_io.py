"""Tests for blendnet.utilities.network_io and blendnet.utilities.settings."""

import csv
import io
import json

import numpy as np
import pytest

from blendnet.analysis.sweep_analysis import SweepGrid
from blendnet.network_core.errors import NetworkDataError
from blendnet.utilities.network_io import (
    GRID_FORMAT,
    dump_network,
    grid_to_dict,
    load_network,
    network_from_dict,
    network_to_dict,
    write_curve_csv,
    write_grid_csv,
    write_json,
)
from blendnet.utilities.settings import (
    DEFAULT_OPTIONS,
    GAS_FILE_ENV,
    gas_options,
    load_gas_options,
)


def _pair_data(**extra):
    data = {
        "nodes": [
            {"id": "a", "load": -1, "zeta": 0.5, "pressure_anchor": 10},
            {"id": "b", "load": 1},
        ],
        "edges": [{"id": "e0", "foot": "a", "head": "b", "length": 2}],
    }
    data.update(extra)
    return data


@pytest.fixture
def grid():
    return SweepGrid(
        np.array([-1.0, 1.0]),
        np.array([0.0, 1.0]),
        np.array([[1.0, 2.0], [np.nan, 4.0]]),
        np.array([[0.1, 0.2], [np.nan, 0.4]]),
        np.array([["converged", "converged"], ["infeasible", "converged"]]),
        "e0",
    )


class TestLoadNetwork:
    def test_example_network(self, single_cycle) -> None:
        assert len(single_cycle.nodes) == 8
        assert single_cycle.node("v0").supply_composition == 0.75
        assert single_cycle.anchor == "v0"
        assert all(e.friction == 5e-6 for e in single_cycle.edges)
        assert single_cycle.gas.sigma2_ng == gas_options["sigma2_ng"]

    def test_round_trip(self, single_cycle, tmp_path) -> None:
        path = tmp_path / "net.json"
        dump_network(single_cycle, path)
        assert load_network(path) == single_cycle

    def test_malformed_json(self, tmp_path) -> None:
        path = tmp_path / "broken.json"
        path.write_text('{"nodes": [\n  {"id": "a",\n}', encoding="utf-8")
        with pytest.raises(NetworkDataError) as info:
            load_network(path)
        assert info.value.parse_error
        assert str(info.value).startswith(f"{path}:3:")

    def test_schema_mismatch(self) -> None:
        data = _pair_data()
        del data["nodes"][1]["load"]
        with pytest.raises(NetworkDataError, match="load") as info:
            network_from_dict(data)
        assert info.value.parse_error

    def test_unknown_field(self) -> None:
        with pytest.raises(NetworkDataError, match="pressure"):
            network_from_dict(_pair_data(pressure=1.0))

    def test_invalid_network(self) -> None:
        data = _pair_data()
        data["nodes"][1]["load"] = 2
        with pytest.raises(NetworkDataError, match="load-balance") as info:
            network_from_dict(data)
        assert not info.value.parse_error
        assert [v.kind for v in info.value.violations] == ["load-balance"]

    def test_lenient_load(self) -> None:
        data = _pair_data()
        data["nodes"][1]["load"] = 2
        network = network_from_dict(data, strict=False)
        assert network.node("b").load == 2.0

    def test_gas_section_overrides_defaults(self) -> None:
        network = network_from_dict(
            _pair_data(gas={"sigma2_h2": 9.0, "sigma2_ng": 3.0, "friction": 0.5})
        )
        assert (network.gas.sigma2_h2, network.gas.sigma2_ng) == (9.0, 3.0)
        assert network.edge("e0").friction == 0.5
        assert network.edge("e0").diameter == gas_options["diameter"]

    def test_invalid_gas_constants(self) -> None:
        with pytest.raises(NetworkDataError, match="sigma2_h2 > sigma2_ng"):
            network_from_dict(_pair_data(gas={"sigma2_h2": 1.0, "sigma2_ng": 3.0}))

    def test_to_dict_omits_unset_fields(self, single_cycle) -> None:
        data = network_to_dict(single_cycle)
        assert data["nodes"][2] == {"id": "v2", "load": 2.0}
        assert data["edges"][0]["friction"] == 5e-6


class TestGasOptions:
    def test_defaults_without_file(self) -> None:
        assert load_gas_options() == gas_options

    def test_environment_file(self, tmp_path, monkeypatch) -> None:
        path = tmp_path / "gas.json"
        path.write_text(json.dumps({"friction": 0.02, "colour": 1}))
        monkeypatch.setenv(GAS_FILE_ENV, str(path))
        options = load_gas_options()
        assert options["friction"] == 0.02
        assert "colour" not in options
        assert network_from_dict(_pair_data()).edge("e0").friction == 0.02

    def test_file_section_wins_over_environment(self, tmp_path, monkeypatch) -> None:
        path = tmp_path / "gas.json"
        path.write_text(json.dumps({"friction": 0.02}))
        monkeypatch.setenv(GAS_FILE_ENV, str(path))
        network = network_from_dict(_pair_data(gas={"friction": 0.03}))
        assert network.edge("e0").friction == 0.03

    def test_solver_options_updated(self) -> None:
        options = DEFAULT_OPTIONS.updated(tol_p=1e-6, nu0=None, unknown=3)
        assert options.tol_p == 1e-6
        assert options.nu0 == DEFAULT_OPTIONS.nu0
        assert DEFAULT_OPTIONS.tol_p == 1e-10


class TestResultFiles:
    def test_grid_csv(self, grid, tmp_path) -> None:
        path = tmp_path / "grid.csv"
        write_grid_csv(grid, path)
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["lambda", "mu", "Hp", "Heta", "status"]
        assert len(rows) == 5
        assert rows[1] == ["-1.0", "0.0", "1.0", "0.1", "converged"]
        assert rows[3][2] == "nan" and rows[3][4] == "infeasible"

    def test_grid_json(self, grid, tmp_path) -> None:
        path = tmp_path / "grid.json"
        write_json(grid_to_dict(grid), path)
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["format"] == GRID_FORMAT
        assert data["cut_edge"] == "e0"
        assert data["Hp"] == [[1.0, 2.0], [None, 4.0]]
        assert data["status"][1] == ["infeasible", "converged"]

    def test_curve_csv_to_stream(self) -> None:
        stream = io.StringIO()
        write_curve_csv(
            [0.0, 1.0], [0.25, float("nan")], ["converged", "error"], "g",
            stream=stream,
        )
        lines = stream.getvalue().splitlines()
        assert lines == ["lambda,g,status", "0.0,0.25,converged", "1.0,nan,error"]

    def test_json_to_stream(self) -> None:
        stream = io.StringIO()
        write_json({"a": 1}, stream=stream)
        assert json.loads(stream.getvalue()) == {"a": 1}

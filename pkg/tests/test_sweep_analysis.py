"""Tests for blendnet.analysis.sweep_analysis."""

from dataclasses import replace

import numpy as np
import pytest

from blendnet.analysis.sweep_analysis import (
    CONVERGED,
    DEGENERATE,
    RestrictedCurve,
    composition_slice,
    default_lambda_range,
    resolve_cut,
    restricted_g,
    root_curve,
    sweep,
)
from blendnet.network_core.errors import DomainError, TopologyError, UnknownIdError
from blendnet.network_core.network_model import Network, cut
from blendnet.solvers.cut_solver import solve_single_cycle
from tests.conftest import make_network
from tests.test_cut_solver import mu_eta_closed_form


class TestResolveCut:
    def test_default_is_lowest_cycle_edge(self, diamond) -> None:
        assert resolve_cut(diamond).cut_edge == "e0"

    def test_bridge(self, single_cycle) -> None:
        with pytest.raises(TopologyError, match="does not lie on a cycle"):
            resolve_cut(single_cycle, "e4")

    def test_tree(self) -> None:
        network = make_network(
            [("a", -1.0, 0.5, 10.0), ("b", 1.0, None, None)],
            [("e0", "a", "b", 1.0)],
        )
        with pytest.raises(TopologyError, match="no cycle"):
            resolve_cut(network)


class TestDefaultLambdaRange:
    def test_tree_cut(self, single_cycle) -> None:
        cg = cut(single_cycle, "e0")
        assert default_lambda_range(single_cycle, cg) == (-6.0, 2.0)

    def test_total_supply_bound(self, diamond) -> None:
        cg = cut(diamond, "e8")
        assert default_lambda_range(diamond, cg) == (-8.0, 8.0)
        assert default_lambda_range(diamond, cg, raw_load_bound=True) == (
            -16.0,
            16.0,
        )


class TestSweep:
    def test_small_grid(self, single_cycle) -> None:
        grid = sweep(single_cycle, "e0", n_lambda=5, n_mu=3)
        assert grid.lambda_grid == pytest.approx([-6.0, -4.0, -2.0, 0.0, 2.0])
        assert grid.mu_grid == pytest.approx([0.0, 0.5, 1.0])
        assert grid.Hp.shape == grid.Heta.shape == grid.status.shape == (5, 3)
        assert np.all(grid.status == CONVERGED)
        assert grid.converged_fraction == 1.0
        assert np.all(grid.Hp[0] <= 0.0)
        assert np.all(grid.Hp[-1] >= 0.0)
        midpoint = 0.5 * (grid.Heta[:, 0] + grid.Heta[:, 2])
        assert grid.Heta[:, 1] == pytest.approx(midpoint, abs=1e-12)

    def test_records(self, single_cycle) -> None:
        grid = sweep(single_cycle, "e0", lambda_range=(-1.0, 1.0), n_lambda=2, n_mu=2)
        records = list(grid.records())
        assert len(records) == 4
        lam, mu, hp, heta, status = records[1]
        assert (lam, mu, status) == (-1.0, 1.0, CONVERGED)
        assert hp == grid.Hp[0, 1]
        assert heta == grid.Heta[0, 1]

    def test_grid_too_small(self, single_cycle) -> None:
        with pytest.raises(DomainError, match="at least 2"):
            sweep(single_cycle, "e0", n_lambda=1)

    def test_failures_are_recorded(self, single_cycle) -> None:
        edges = [replace(e, friction=1.0) for e in single_cycle.edges]
        network = Network(single_cycle.nodes, edges, single_cycle.gas)
        grid = sweep(network, "e0", n_lambda=2, n_mu=2)
        assert np.all(grid.status == "infeasible")
        assert np.all(np.isnan(grid.Hp))
        assert grid.converged_fraction == 0.0

    def test_process_pool_matches_serial(self, single_cycle) -> None:
        serial = sweep(single_cycle, "e0", n_lambda=3, n_mu=3)
        pooled = sweep(single_cycle, "e0", n_lambda=3, n_mu=3, workers=2)
        np.testing.assert_array_equal(serial.Hp, pooled.Hp)
        np.testing.assert_array_equal(serial.Heta, pooled.Heta)
        np.testing.assert_array_equal(serial.status, pooled.status)

    def test_pressure_gap_signs_at_total_supply_bound(self, diamond) -> None:
        grid = sweep(diamond, "e8", n_lambda=2, n_mu=2)
        assert grid.lambda_grid == pytest.approx([-8.0, 8.0])
        assert np.all(grid.status == CONVERGED)
        assert np.all(grid.Hp[0] < 0.0)
        assert np.all(grid.Hp[1] > 0.0)

    @pytest.mark.slow
    def test_two_cycle_grid(self, diamond) -> None:
        grid = sweep(diamond, "e8")
        assert grid.Hp.shape == (50, 51)
        assert grid.converged_fraction >= 0.9
        ends = (grid.status[[0, -1]] == CONVERGED).astype(bool)
        assert np.all(grid.Hp[0][ends[0]] < 0.0)
        assert np.all(grid.Hp[-1][ends[1]] > 0.0)


class TestRootCurve:
    def test_analytic_on_tree_cut(self, single_cycle) -> None:
        samples = [-5.0, -1.0, 1.0]
        curve = root_curve(single_cycle, "e0", samples)
        assert curve.method == "analytic-tree-cut"
        assert list(curve.status) == [CONVERGED] * 3
        expected = [mu_eta_closed_form(lam) for lam in samples]
        assert curve.mu_values == pytest.approx(expected, abs=1e-10)

    def test_out_of_range_sample(self, single_cycle) -> None:
        curve = root_curve(single_cycle, "e0", [3.0])
        assert list(curve.status) == ["out_of_range"]
        assert np.isnan(curve.mu_values[0])

    def test_scalar_root_on_cycle_cut(self, diamond) -> None:
        curve = root_curve(diamond, "e8", [0.0, 2.0])
        assert curve.method == "scalar-rootfind"
        assert list(curve.status) == [DEGENERATE, CONVERGED]
        assert curve.mu_values[0] == 0.5
        assert 0.0 <= curve.mu_values[1] <= 1.0

    def test_jump_across_zero_on_cycle_cut(self, diamond) -> None:
        step = 8.0 / 49.0
        curve = root_curve(diamond, "e8", [-step, step])
        assert list(curve.status) == [CONVERGED, CONVERGED]
        assert abs(curve.mu_values[1] - curve.mu_values[0]) > 0.2


class TestRestrictedG:
    def test_sign_change_brackets_cycle_flow(self, single_cycle) -> None:
        samples = np.linspace(-6.0, 2.0, 20)
        curve = restricted_g(single_cycle, "e0", samples)
        assert np.all(curve.status == CONVERGED)
        assert np.all(np.diff(curve.g) > 0.0)
        low, high = curve.sign_change()
        lam_star = solve_single_cycle(single_cycle).diagnostics["lambda_star"]
        assert low < lam_star < high

    @pytest.mark.slow
    def test_two_cycle_increasing_with_one_sign_change(self, diamond) -> None:
        curve = restricted_g(diamond, "e8", np.linspace(-8.0, 8.0, 50))
        assert np.all(curve.status == CONVERGED)
        assert np.all(np.diff(curve.g) > 0.0)
        assert np.sum(np.diff(np.sign(curve.g)) != 0) == 1
        assert curve.sign_change() is not None
        left, right = curve.mu_values[24], curve.mu_values[25]
        assert abs(right - left) > 0.2

    def test_no_sign_change(self) -> None:
        curve = RestrictedCurve(
            np.array([0.0, 1.0]),
            np.array([1.0, 2.0]),
            np.array([0.5, 0.5]),
            np.array([CONVERGED, CONVERGED]),
        )
        assert curve.sign_change() is None

    def test_sign_change_skips_failed_samples(self) -> None:
        curve = RestrictedCurve(
            np.array([0.0, 1.0, 2.0]),
            np.array([-1.0, np.nan, 2.0]),
            np.array([0.5, np.nan, 0.5]),
            np.array([CONVERGED, "infeasible", CONVERGED]),
        )
        assert curve.sign_change() == (0.0, 2.0)


class TestCompositionSlice:
    def test_affine_downstream_of_cut(self, single_cycle) -> None:
        values, status = composition_slice(
            single_cycle, "e0", "v6", [1.0], [0.0, 0.5, 1.0]
        )
        assert np.all(status == CONVERGED)
        assert values[0] == pytest.approx([0.125, 0.375, 0.625])

    def test_constant_upstream_of_cut(self, single_cycle) -> None:
        values, _ = composition_slice(single_cycle, "e0", "v4", [1.0], [0.0, 1.0])
        assert values[0] == pytest.approx([3.75 / 7.0] * 2)

    def test_two_cycle_plateau(self, diamond) -> None:
        values, status = composition_slice(
            diamond, "e8", "v4", [-0.5, 0.5, 2.0], [0.0, 0.5, 1.0]
        )
        assert np.all(status == CONVERGED)
        assert values == pytest.approx(np.full((3, 3), 0.75), abs=1e-8)

    def test_unknown_node(self, single_cycle) -> None:
        with pytest.raises(UnknownIdError):
            composition_slice(single_cycle, "e0", "nowhere", [1.0], [0.5])

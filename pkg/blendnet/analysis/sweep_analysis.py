"""Sampling of the cut gap functions over (lambda, mu).

The grid sweep evaluates H_p and H_eta on a rectangular grid, the root curve
mu_eta(lambda) is found per lambda sample, and g(lambda) = H_p on the root
curve is sampled from it. Every point is solved independently; failures are
recorded in a status array and never stop the sweep.
"""

import logging
from dataclasses import dataclass
from functools import partial
from multiprocessing import Pool

import numpy as np
from scipy.optimize import brentq

from blendnet.network_core.errors import (
    ConvergenceError,
    DomainError,
    InfeasibleNetworkError,
    TopologyError,
)
from blendnet.network_core.network_model import cut, find_cycles
from blendnet.solvers.cut_solver import (
    CutBoundary,
    boundary_network,
    cut_gaps,
    gamma_constants,
    root_curve_mu,
)
from blendnet.solvers.dispatch import solve

logger = logging.getLogger(__name__)

CONVERGED = "converged"
DEGENERATE = "degenerate"
SCAN = "scan"
INFEASIBLE = "infeasible"
NOT_CONVERGED = "not_converged"
OUT_OF_RANGE = "out_of_range"
ERROR = "error"

# Statuses whose samples carry usable values.
USABLE = (CONVERGED, DEGENERATE, SCAN)

DEGENERATE_TOL = 1e-12
SCAN_TOL = 1e-6
SCAN_POINTS = 101

# ------------------------------- Result types --------------------------------


@dataclass
class SweepGrid:
    """H_p and H_eta sampled on a (lambda, mu) grid, rows indexed by lambda."""

    lambda_grid: np.ndarray
    mu_grid: np.ndarray
    Hp: np.ndarray
    Heta: np.ndarray
    status: np.ndarray
    cut_edge: str

    @property
    def converged_fraction(self):
        return float(np.mean(self.status == CONVERGED))

    def records(self):
        """Yield (lambda, mu, Hp, Heta, status) in row-major order."""
        for i, lam in enumerate(self.lambda_grid):
            for k, mu in enumerate(self.mu_grid):
                yield lam, mu, self.Hp[i, k], self.Heta[i, k], self.status[i, k]


@dataclass
class RootCurve:
    """Root mu_eta of the composition gap per lambda sample.

    `method` is 'analytic-tree-cut' when the cut graph is a tree and
    'scalar-rootfind' otherwise.
    """

    lambda_samples: np.ndarray
    mu_values: np.ndarray
    method: str
    status: np.ndarray


@dataclass
class RestrictedCurve:
    """g(lambda) = H_p(lambda, mu_eta(lambda)) per lambda sample."""

    lambda_samples: np.ndarray
    g: np.ndarray
    mu_values: np.ndarray
    status: np.ndarray

    def sign_change(self):
        """First bracket (lambda_i, lambda_i+1) on which g changes sign.

        Returns None if the usable samples never change sign.
        """
        usable = np.isin(self.status, USABLE)
        lam = self.lambda_samples[usable]
        g = self.g[usable]
        for i in range(len(g) - 1):
            if g[i] == 0.0:
                return float(lam[i]), float(lam[i])
            if g[i] * g[i + 1] < 0.0:
                return float(lam[i]), float(lam[i + 1])
        if len(g) and g[-1] == 0.0:
            return float(lam[-1]), float(lam[-1])
        return None


# ------------------------------- Cut handling --------------------------------


def resolve_cut(network, cut_edge=None):
    """Cut `network` at `cut_edge`, by default the lowest id on any cycle.

    Raises
    ------
    TopologyError
        If the network has no cycle or the cut edge lies on none.
    """
    if cut_edge is None:
        cycle_edges = {e for cycle in find_cycles(network) for e in cycle.edges}
        if not cycle_edges:
            raise TopologyError("network has no cycle to cut")
        cut_edge = min(cycle_edges)
    cg = cut(network, cut_edge)
    if cg.splits_network:
        raise TopologyError(f"cut edge '{cut_edge}' does not lie on a cycle")
    return cg


def evaluate_cut(cg, boundary, solver="auto", options=None):
    """Solve the cut network under `boundary` with the dispatched solver.

    Returns
    -------
    H_p, H_eta : float
    solution : Solution
        Solution of the cut network.
    """
    solution = solve(boundary_network(cg, boundary), solver, options=options)
    h_p, h_eta = cut_gaps(cg, solution)
    return h_p, h_eta, solution


def default_lambda_range(network, cg, raw_load_bound=False):
    """[gamma_min, gamma_max] for a tree cut, else plus/minus total supply.

    With `raw_load_bound` the multi-cycle bound is the sum of all |b_v|.
    """
    if cg.is_tree:
        gamma = gamma_constants(cg)
        return gamma.gamma_min, gamma.gamma_max
    loads = network.loads
    if raw_load_bound:
        bound = float(np.abs(loads).sum())
    else:
        bound = float(np.maximum(-loads, 0.0).sum())
    return -bound, bound


def _failure_status(exc):
    if isinstance(exc, InfeasibleNetworkError):
        return INFEASIBLE
    if isinstance(exc, ConvergenceError):
        return NOT_CONVERGED
    if isinstance(exc, DomainError):
        return OUT_OF_RANGE
    return ERROR


# ------------------------------- Grid sweep ----------------------------------


def _sweep_row(lam, cg, mu_grid, solver, options):
    hp = np.full(len(mu_grid), np.nan)
    heta = np.full(len(mu_grid), np.nan)
    status = np.full(len(mu_grid), CONVERGED, dtype=object)
    for k, mu in enumerate(mu_grid):
        try:
            boundary = CutBoundary(lam, mu)
            hp[k], heta[k], _ = evaluate_cut(cg, boundary, solver, options)
        except Exception as exc:  # recorded per point
            status[k] = _failure_status(exc)
            logger.warning("sweep point (%g, %g) failed: %s", lam, mu, exc)
    return hp, heta, status


def sweep_rows(
    cg, lambda_values, mu_grid, solver="auto", options=None, workers=None
):
    """H_p, H_eta and status arrays for the given lambda rows of a grid.

    With `workers` > 1 the rows are spread over a process pool.
    """
    row = partial(
        _sweep_row, cg=cg, mu_grid=mu_grid, solver=solver, options=options
    )
    if workers and workers > 1:
        with Pool(workers) as pool:
            rows = pool.map(row, lambda_values)
    else:
        rows = [row(lam) for lam in lambda_values]
    if not rows:
        empty = np.empty((0, len(mu_grid)))
        return empty, empty.copy(), empty.astype(str)
    return (
        np.vstack([r[0] for r in rows]),
        np.vstack([r[1] for r in rows]),
        np.vstack([r[2] for r in rows]).astype(str),
    )


def sweep(
    network,
    cut_edge=None,
    lambda_range=None,
    n_lambda=50,
    n_mu=51,
    solver="auto",
    raw_load_bound=False,
    workers=None,
    options=None,
):
    """Evaluate H_p and H_eta on a uniform (lambda, mu) grid.

    Parameters
    ----------
    network : Network
    cut_edge : str, optional
        Edge to cut; must lie on a cycle.
    lambda_range : (float, float), optional
        Defaults to `default_lambda_range`.
    n_lambda, n_mu : int
        Grid sizes, at least 2 each. mu spans [0, 1].
    solver : {'auto', 'tree', 'cut', 'lm'}
        Solver for the cut network.
    raw_load_bound : bool
        Use the sum of all |b_v| for the default multi-cycle range.
    workers : int, optional
        Number of processes evaluating lambda rows.
    options : SolverOptions, optional

    Returns
    -------
    SweepGrid
    """
    if n_lambda < 2 or n_mu < 2:
        raise DomainError(
            f"grid needs at least 2 points per axis, got {n_lambda} x {n_mu}"
        )
    cg = resolve_cut(network, cut_edge)
    if lambda_range is None:
        lambda_range = default_lambda_range(network, cg, raw_load_bound)
    lambda_grid = np.linspace(lambda_range[0], lambda_range[1], n_lambda)
    mu_grid = np.linspace(0.0, 1.0, n_mu)

    hp, heta, status = sweep_rows(cg, lambda_grid, mu_grid, solver, options, workers)
    grid = SweepGrid(lambda_grid, mu_grid, hp, heta, status, cg.cut_edge)
    logger.info(
        "sweep of %d x %d points over lambda in [%g, %g]: %.1f%% converged",
        n_lambda,
        n_mu,
        lambda_range[0],
        lambda_range[1],
        100.0 * grid.converged_fraction,
    )
    return grid


# ------------------------------- Root curve ----------------------------------


def _scalar_root(cg, lam, solver, options):
    def h_eta(mu):
        return evaluate_cut(cg, CutBoundary(lam, mu), solver, options)[1]

    h0, h1 = h_eta(0.0), h_eta(1.0)
    if abs(h0) <= DEGENERATE_TOL and abs(h1) <= DEGENERATE_TOL:
        return 0.5, DEGENERATE
    if h0 == 0.0:
        return 0.0, CONVERGED
    if h1 == 0.0:
        return 1.0, CONVERGED
    if h0 * h1 < 0.0:
        return brentq(h_eta, 0.0, 1.0, xtol=1e-14), CONVERGED

    mus = np.linspace(0.0, 1.0, SCAN_POINTS)
    values = np.abs([h_eta(mu) for mu in mus])
    best = int(np.argmin(values))
    logger.warning(
        "no sign change of H_eta at lambda %g; best |H_eta| = %.3e at mu %g",
        lam,
        values[best],
        mus[best],
    )
    if values[best] <= SCAN_TOL:
        return float(mus[best]), SCAN
    return np.nan, NOT_CONVERGED


def root_curve(
    network, cut_edge=None, lambda_samples=(), solver="auto", options=None
):
    """Root mu_eta(lambda) of H_eta(lambda, .) at each lambda sample.

    A tree-shaped cut graph uses the composition of the demand-side cut
    node. Otherwise H_eta is solved for mu on [0, 1] by Brent's method, with
    a dense scan for its smallest magnitude when it does not change sign.

    Returns
    -------
    RootCurve
    """
    cg = resolve_cut(network, cut_edge)
    samples = np.asarray(lambda_samples, dtype=float)
    mu_values = np.full(samples.shape, np.nan)
    status = np.full(samples.shape, CONVERGED, dtype=object)

    analytic = cg.is_tree and solver in ("auto", "tree")
    gamma = gamma_constants(cg) if analytic else None
    for i, lam in enumerate(samples):
        try:
            if analytic:
                mu_values[i] = root_curve_mu(cg, lam, gamma)
            else:
                mu_values[i], status[i] = _scalar_root(cg, lam, solver, options)
        except Exception as exc:  # recorded per sample
            status[i] = _failure_status(exc)
            logger.warning("root curve at lambda %g failed: %s", lam, exc)
    method = "analytic-tree-cut" if analytic else "scalar-rootfind"
    return RootCurve(samples, mu_values, method, status.astype(str))


def restricted_g(
    network, cut_edge=None, lambda_samples=(), solver="auto", options=None
):
    """Sample g(lambda) = H_p(lambda, mu_eta(lambda)).

    Returns
    -------
    RestrictedCurve
    """
    cg = resolve_cut(network, cut_edge)
    curve = root_curve(network, cg.cut_edge, lambda_samples, solver, options)
    g = np.full(curve.lambda_samples.shape, np.nan)
    status = curve.status.astype(object)
    for i, (lam, mu) in enumerate(zip(curve.lambda_samples, curve.mu_values)):
        if status[i] not in USABLE:
            continue
        try:
            g[i] = evaluate_cut(cg, CutBoundary(lam, mu), solver, options)[0]
        except Exception as exc:  # recorded per sample
            status[i] = _failure_status(exc)
            logger.warning("g at lambda %g failed: %s", lam, exc)
    return RestrictedCurve(
        curve.lambda_samples, g, curve.mu_values, status.astype(str)
    )


def composition_slice(
    network, cut_edge, node, lambda_values, mu_grid, solver="auto", options=None
):
    """Composition of `node` in the cut network on a (lambda, mu) grid.

    Returns
    -------
    values : ndarray
        Shape (len(lambda_values), len(mu_grid)), NaN where a solve failed.
    status : ndarray of str
    """
    cg = resolve_cut(network, cut_edge)
    network.node(node)
    v = cg.derived.node_index[node]
    lambda_values = np.asarray(lambda_values, dtype=float)
    mu_grid = np.asarray(mu_grid, dtype=float)
    values = np.full((lambda_values.size, mu_grid.size), np.nan)
    status = np.full(values.shape, CONVERGED, dtype=object)
    for i, lam in enumerate(lambda_values):
        for k, mu in enumerate(mu_grid):
            try:
                solution = evaluate_cut(cg, CutBoundary(lam, mu), solver, options)[2]
                values[i, k] = solution.eta_node[v]
            except Exception as exc:  # recorded per point
                status[i, k] = _failure_status(exc)
                logger.warning(
                    "composition at (%g, %g) failed: %s", lam, mu, exc
                )
    return values, status.astype(str)

"""Levenberg-Marquardt solver on the full nonlinear network model.

The unknowns are the edge flows, the nodal compositions and the nodal
squared pressures. The residual stacks the pipe law per edge, mass
conservation per node, the mixing rule per node (multiplied through by its
denominator) and the pressure anchor. The kinks of |q| and of the inflow
selection are kept as they are; the finite-difference Jacobian copes with
them in practice and failures are reported.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import approx_fprime

from blendnet.network_core.errors import ConvergenceError, InfeasibleNetworkError
from blendnet.network_core.gas_physics import pressure_drop_squared
from blendnet.solvers.tree_solver import Solution, edge_compositions
from blendnet.utilities.settings import DEFAULT_OPTIONS

logger = logging.getLogger(__name__)

ETA_SLACK = 1e-6

# ------------------------------ Vectors --------------------------------------


@dataclass
class UnknownVector:
    """Point of the unknown space, arrays in dense network order."""

    q: np.ndarray
    eta: np.ndarray
    p2: np.ndarray

    def to_array(self):
        return np.concatenate([self.q, self.eta, self.p2])

    @classmethod
    def from_array(cls, network, x):
        n_e, n_v = len(network.edges), len(network.nodes)
        x = np.asarray(x, dtype=float)
        return cls(x[:n_e], x[n_e : n_e + n_v], x[n_e + n_v :])

    @classmethod
    def from_solution(cls, solution):
        return cls(
            np.asarray(solution.q, dtype=float),
            np.asarray(solution.eta_node, dtype=float),
            np.asarray(solution.p2, dtype=float),
        )


@dataclass
class ResidualVector:
    """Residual blocks of the full model.

    Attributes
    ----------
    pressure : ndarray
        p2[head] - p2[foot] - sigma_tilde * q|q| per edge.
    mass : ndarray
        A q - b per node.
    mixing : ndarray
        Cleared mixing rule per node.
    anchor : float
        p2 at the anchor minus the squared anchor pressure.
    """

    pressure: np.ndarray
    mass: np.ndarray
    mixing: np.ndarray
    anchor: float

    def to_array(self):
        return np.concatenate(
            [self.pressure, self.mass, self.mixing, [self.anchor]]
        )

    def max_abs(self):
        values = self.to_array()
        return float(np.max(np.abs(values))) if values.size else 0.0


# ------------------------------ Residual -------------------------------------


def mixing_residual(network, q, eta_node):
    """Hydrogen balance per node with the mixing denominator cleared.

    eta_v * (inflow_v + b_v^-) - sum(eta_e * inflow_e) - zeta_v * b_v^-
    """
    q = np.asarray(q, dtype=float)
    eta_node = np.asarray(eta_node, dtype=float)
    inflow = np.maximum(network.incidence * q[np.newaxis, :], 0.0)
    supply = np.maximum(-network.loads, 0.0)
    eta_edge = edge_compositions(network, q, eta_node)
    return (
        eta_node * (inflow.sum(axis=1) + supply)
        - inflow @ eta_edge
        - network.supply_compositions * supply
    )


def residual(network, u):
    """Residual of the full model at `u`; any point can be evaluated.

    Parameters
    ----------
    network : Network
    u : UnknownVector

    Returns
    -------
    ResidualVector
    """
    q, eta, p2 = (np.asarray(a, dtype=float) for a in (u.q, u.eta, u.p2))
    foot, head = network.foot_index, network.head_index
    drop = pressure_drop_squared(
        eta[foot],
        eta[head],
        q,
        network.lengths,
        network.diameters,
        network.frictions,
        network.gas,
        check=False,
    )
    pressure = p2[head] - p2[foot] - np.atleast_1d(drop)
    mass = network.incidence @ q - network.loads
    mixing = mixing_residual(network, q, eta)
    anchor = p2[network.node_index[network.anchor]] - network.anchor_pressure**2
    return ResidualVector(pressure, mass, mixing, float(anchor))


def default_init(network):
    """Starting point of the Levenberg-Marquardt iteration.

    Flows are the minimum-norm solution of A q = b, every composition is the
    supply-weighted mean supply composition and every squared pressure is
    the squared anchor pressure.
    """
    q = scipy.linalg.lstsq(network.incidence, network.loads)[0]
    supply = np.maximum(-network.loads, 0.0)
    total = supply.sum()
    mean = (
        float(supply @ network.supply_compositions / total) if total > 0 else 0.0
    )
    return UnknownVector(
        q,
        np.full(len(network.nodes), mean),
        np.full(len(network.nodes), network.anchor_pressure**2),
    )


# ------------------------------ Solver ---------------------------------------


def fd_jacobian(fun, x, fd_step):
    """Forward-difference Jacobian with steps fd_step * max(1, |x_i|)."""
    epsilon = fd_step * np.maximum(1.0, np.abs(x))
    return np.atleast_2d(approx_fprime(x, fun, epsilon))


def solve_lm(network, init=None, options=None):
    """Solve the full model by Levenberg-Marquardt.

    Each step solves (J^T J + nu I) delta = -J^T r with a forward-difference
    Jacobian. The damping nu halves after a step that lowers ||r|| and
    doubles after one that does not.

    Parameters
    ----------
    network : Network
    init : UnknownVector, optional
        Starting point, `default_init(network)` if omitted.
    options : SolverOptions, optional

    Returns
    -------
    Solution

    Raises
    ------
    ConvergenceError
        If the final residual exceeds options.residual_tol. The error carries
        the best iterate.
    InfeasibleNetworkError
        If a converged squared pressure is not positive.
    """
    options = options or DEFAULT_OPTIONS
    init = init or default_init(network)

    def fun(x):
        return residual(network, UnknownVector.from_array(network, x)).to_array()

    x = init.to_array()
    r = fun(x)
    cost = float(r @ r)
    nu = options.nu0
    iterations = 0
    for iterations in range(1, options.lm_max_iter + 1):
        if np.max(np.abs(r)) < options.lm_tol:
            iterations -= 1
            break
        jac = fd_jacobian(fun, x, options.fd_step)
        lhs = jac.T @ jac + nu * np.eye(x.size)
        try:
            delta = scipy.linalg.solve(lhs, -(jac.T @ r), assume_a="pos")
        except np.linalg.LinAlgError:
            nu *= 2.0
            continue
        x_new = x + delta
        r_new = fun(x_new)
        cost_new = float(r_new @ r_new)
        if cost_new < cost:
            x, r, cost = x_new, r_new, cost_new
            nu *= 0.5
        else:
            nu *= 2.0
        logger.debug(
            "LM %d: |r|_inf = %.3e, |delta| = %.3e, nu = %.1e",
            iterations,
            np.max(np.abs(r)),
            np.linalg.norm(delta),
            nu,
        )
        if np.linalg.norm(delta) < options.lm_step_tol:
            break

    u = UnknownVector.from_array(network, x)
    res = residual(network, u)
    res_max = res.max_abs()
    if res_max > options.residual_tol:
        raise ConvergenceError(
            f"Levenberg-Marquardt stopped at residual {res_max:.3e} after "
            f"{iterations} iterations",
            best=u,
            residual=res_max,
            iterations=iterations,
        )
    if np.any(u.p2 <= 0.0):
        bad = network.node_ids[int(np.argmin(u.p2))]
        raise InfeasibleNetworkError(
            f"converged squared pressure at node '{bad}' is not positive"
        )

    warnings = []
    if np.any((u.eta < -ETA_SLACK) | (u.eta > 1.0 + ETA_SLACK)):
        warnings.append("compositions outside [0, 1] at convergence")
        logger.warning("LM solution has compositions outside [0, 1]")
    logger.info(
        "LM converged in %d iterations, residual %.3e", iterations, res_max
    )
    return Solution(
        network.node_ids,
        network.edge_ids,
        u.q.copy(),
        u.eta.copy(),
        edge_compositions(network, u.q, u.eta),
        u.p2.copy(),
        diagnostics={
            "solver_used": "lm",
            "iterations": iterations,
            "residual_max": res_max,
            "warnings": warnings,
        },
    )

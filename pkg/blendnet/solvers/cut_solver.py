"""Constructive solver for networks with exactly one cycle.

One edge of the cycle is cut into two stubs ending at new boundary nodes
v_cl and v_cr, which turns the network into a tree. Two parameters close the
cut: the flow lambda through it (load lambda at v_cl and -lambda at v_cr) and
the composition mu supplied at whichever cut node is a supply. The gaps

    H_p(lambda, mu)   = p2[v_cr] - p2[v_cl]
    H_eta(lambda, mu) = eta[v_cr] - eta[v_cl]

vanish together exactly when the cut tree solution is a solution of the
original network. For fixed lambda, H_eta has a unique root mu_eta(lambda),
and g(lambda) = H_p(lambda, mu_eta(lambda)) changes sign on the interval
[gamma_min, gamma_max] of cut flows for which some path edge carries no
flow. Bisection on g finds the cycle flow.
"""

import logging
from dataclasses import dataclass

import numpy as np

from blendnet.network_core.errors import (
    BlendNetError,
    ConvergenceError,
    DomainError,
    InfeasibleNetworkError,
    TopologyError,
)
from blendnet.network_core.gas_physics import pressure_drop_squared
from blendnet.network_core.network_model import cut, find_cycles
from blendnet.solvers.tree_solver import Solution, solve_flows, solve_tree
from blendnet.utilities.settings import DEFAULT_OPTIONS

logger = logging.getLogger(__name__)

PROBE_MU = 0.5
PROBE_SPREAD_TOL = 1e-12
EPS_SHIFT = 1e-8

# ------------------------------ Cut boundary ---------------------------------


@dataclass(frozen=True)
class CutBoundary:
    """Boundary data closing a cut.

    Attributes
    ----------
    lam : float
        Flow through the cut.
    mu : float
        Supply composition of the supply-side cut node, in [0, 1].
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise DomainError(f"mu must lie in [0, 1], got {self.mu}")


@dataclass(frozen=True)
class GammaBounds:
    """Cut-flow constants along the path from v_cr to v_cl.

    On the cut tree every path edge e satisfies
    a(v_e, e) * q_e(lambda) = gamma[e] - lambda, with v_e the end of e closer
    to v_cr.
    """

    gamma: dict
    gamma_min: float
    gamma_max: float
    path_nodes: tuple
    path_edges: tuple

    @property
    def width(self):
        return self.gamma_max - self.gamma_min

    def contains(self, lam, slack=0.0):
        return self.gamma_min - slack <= lam <= self.gamma_max + slack


def boundary_network(cg, boundary):
    """Cut network with the boundary data of `boundary` assigned.

    v_cr (load -lambda) supplies composition mu when lambda > 0, v_cl (load
    lambda) when lambda < 0. At lambda = 0 neither cut node is a supply.
    """
    lam = float(boundary.lam)
    loads = {cg.v_cl: lam, cg.v_cr: -lam}
    compositions = {cg.v_cl: None, cg.v_cr: None}
    if lam > 0.0:
        compositions[cg.v_cr] = boundary.mu
    elif lam < 0.0:
        compositions[cg.v_cl] = boundary.mu
    return cg.derived.with_boundary(loads, compositions)


def _require_tree_cut(cg):
    if cg.splits_network:
        raise TopologyError(f"cut edge '{cg.cut_edge}' does not lie on a cycle")
    if not cg.is_tree:
        raise TopologyError(
            f"cutting '{cg.cut_edge}' leaves {cg.derived.num_cycles} cycles; "
            "the cut graph must be a tree"
        )


# ------------------------------ Gap functions --------------------------------


def gamma_constants(cg):
    """Cut-flow constants of a tree-shaped cut graph.

    The cut tree is solved once at lambda = 0; since its flows are affine in
    lambda with slope -1 along the path, this fixes every gamma.

    Returns
    -------
    GammaBounds
    """
    _require_tree_cut(cg)
    q0 = solve_flows(boundary_network(cg, CutBoundary(0.0, 0.0)))
    derived = cg.derived
    path, path_edges = cg.gap_path

    gamma = {}
    for near, edge_id in zip(path, path_edges):
        sign = -1.0 if derived.edge(edge_id).foot == near else 1.0
        gamma[edge_id] = sign * q0[derived.edge_index[edge_id]]
    values = list(gamma.values())
    return GammaBounds(
        gamma, min(values), max(values), tuple(path), tuple(path_edges)
    )


def solve_cut_tree(cg, boundary):
    """Tree solution of the cut graph under `boundary`."""
    return solve_tree(boundary_network(cg, boundary))


def eval_H(cg, boundary):
    """Pressure and composition gaps between the cut nodes.

    Parameters
    ----------
    cg : CutGraph
        Tree-shaped cut graph.
    boundary : CutBoundary

    Returns
    -------
    H_p : float
        p2[v_cr] - p2[v_cl]
    H_eta : float
        eta[v_cr] - eta[v_cl]
    """
    _require_tree_cut(cg)
    solution = solve_cut_tree(cg, boundary)
    return cut_gaps(cg, solution)


def cut_gaps(cg, solution):
    """H_p and H_eta of a solution of the cut network.

    H_p is the pipe-law change of p2 summed along `cg.gap_path`, which does
    not depend on the anchor pressure.
    """
    derived = cg.derived
    h_p = 0.0
    for near, edge_id in zip(*cg.gap_path):
        j = derived.edge_index[edge_id]
        edge = derived.edges[j]
        drop = pressure_drop_squared(
            solution.eta_node[derived.foot_index[j]],
            solution.eta_node[derived.head_index[j]],
            solution.q[j],
            edge.length,
            edge.diameter,
            edge.friction,
            derived.gas,
            check=False,
        )
        h_p -= drop if edge.foot == near else -drop
    index = derived.node_index
    h_eta = solution.eta_node[index[cg.v_cr]] - solution.eta_node[index[cg.v_cl]]
    return float(h_p), float(h_eta)


def shifted_lambda(lam, gamma):
    """Move lambda = 0 into the interior of the gamma interval.

    The cut nodes carry no flow at lambda = 0, so the one-sided value on the
    side of the interval interior is used instead.
    """
    if lam != 0.0:
        return lam
    eps = EPS_SHIFT * max(1.0, gamma.width)
    if gamma.gamma_max > 0.0:
        return eps
    if gamma.gamma_min < 0.0:
        return -eps
    return lam


def root_curve_mu(cg, lam, gamma=None):
    """Root mu_eta(lambda) of the composition gap.

    On [gamma_min, gamma_max] the demand-side cut node cannot be reached from
    the supply-side one, so its composition does not depend on mu and is the
    root. It is read off a probe solve and checked against a second probe.

    Parameters
    ----------
    cg : CutGraph
    lam : float
    gamma : GammaBounds, optional
        Precomputed bounds of `cg`.

    Returns
    -------
    float
        eta[v_cr] for lambda < 0 and eta[v_cl] otherwise.
    """
    gamma = gamma or gamma_constants(cg)
    if not gamma.contains(lam):
        raise DomainError(
            f"lambda {lam} lies outside [{gamma.gamma_min}, {gamma.gamma_max}]"
        )
    lam = shifted_lambda(lam, gamma)
    demand_side = cg.v_cr if lam < 0.0 else cg.v_cl
    v = cg.derived.node_index[demand_side]

    first = solve_cut_tree(cg, CutBoundary(lam, PROBE_MU)).eta_node[v]
    second = solve_cut_tree(cg, CutBoundary(lam, 0.0)).eta_node[v]
    if abs(first - second) > PROBE_SPREAD_TOL:
        raise BlendNetError(
            f"composition at '{demand_side}' depends on mu at lambda {lam} "
            f"({first} vs {second})"
        )
    return float(min(max(first, 0.0), 1.0))


def restricted_g(cg, lam, gamma=None):
    """Pressure gap along the root curve, g(lambda) = H_p(lambda, mu_eta)."""
    gamma = gamma or gamma_constants(cg)
    mu = root_curve_mu(cg, lam, gamma)
    return eval_H(cg, CutBoundary(lam, mu))[0]


# ------------------------------ Root finding ---------------------------------


def find_cut_root(cg, gamma=None, options=None):
    """Bisection for the root of g on [gamma_min, gamma_max].

    Returns
    -------
    lam : float
        Cut flow with |g(lam)| <= options.tol_p.
    iterations : int

    Raises
    ------
    InfeasibleNetworkError
        If g does not change sign on the interval.
    ConvergenceError
        If the bracket collapses or the iteration limit is reached first.
    """
    gamma = gamma or gamma_constants(cg)
    options = options or DEFAULT_OPTIONS
    tol = options.tol_p

    lo, hi = gamma.gamma_min, gamma.gamma_max
    g_lo = restricted_g(cg, lo, gamma)
    if abs(g_lo) <= tol:
        return lo, 0
    g_hi = restricted_g(cg, hi, gamma)
    if abs(g_hi) <= tol:
        return hi, 0
    if g_lo > 0.0 or g_hi < 0.0:
        raise InfeasibleNetworkError(
            f"no sign change of g on [{lo}, {hi}]: g = ({g_lo:g}, {g_hi:g})"
        )

    best = (abs(g_lo), lo) if abs(g_lo) < abs(g_hi) else (abs(g_hi), hi)
    for iteration in range(1, options.max_iter_bisect + 1):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ConvergenceError(
                f"bisection bracket collapsed with |g| = {best[0]:g}",
                best=best[1],
                residual=best[0],
                iterations=iteration,
                bracket=(lo, hi),
            )
        g_mid = restricted_g(cg, mid, gamma)
        logger.debug(
            "bisection %d: [%.17g, %.17g] g(mid) = %.3e", iteration, lo, hi, g_mid
        )
        if abs(g_mid) < best[0]:
            best = (abs(g_mid), mid)
        if abs(g_mid) <= tol:
            return mid, iteration
        if g_mid < 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not reach |g| <= {tol:g} in "
        f"{options.max_iter_bisect} iterations",
        best=best[1],
        residual=best[0],
        iterations=options.max_iter_bisect,
        bracket=(lo, hi),
    )


# ------------------------------ Full solve -----------------------------------


def default_cut_edge(network, cycle=None):
    """Lowest edge id on the (only) cycle of the network."""
    if cycle is None:
        cycles = find_cycles(network)
        if not cycles:
            raise TopologyError("network has no cycle to cut")
        cycle = cycles[0]
    return min(cycle.edges)


def solve_single_cycle(network, cut_edge=None, options=None):
    """Solve a network with exactly one cycle.

    Parameters
    ----------
    network : Network
    cut_edge : str, optional
        Edge of the cycle to cut; the lowest id on the cycle by default.
    options : SolverOptions, optional

    Returns
    -------
    Solution
        Solution on the original network, with the cut flow lambda_star, the
        closing composition mu_star and the bisection count in its
        diagnostics.
    """
    cycles = find_cycles(network)
    if len(cycles) != 1:
        raise TopologyError(
            f"network has {len(cycles)} cycles; the cut solver needs exactly 1"
        )
    if cut_edge is None:
        cut_edge = default_cut_edge(network, cycles[0])
    elif cut_edge not in cycles[0].edges:
        network.edge(cut_edge)
        raise TopologyError(f"cut edge '{cut_edge}' does not lie on the cycle")

    cg = cut(network, cut_edge)
    gamma = gamma_constants(cg)
    logger.info(
        "cut at '%s': gamma in [%g, %g]", cut_edge, gamma.gamma_min, gamma.gamma_max
    )
    lam_star, iterations = find_cut_root(cg, gamma, options)
    mu_star = root_curve_mu(cg, lam_star, gamma)
    cut_solution = solve_cut_tree(cg, CutBoundary(lam_star, mu_star))
    logger.info(
        "cycle closed after %d bisections: lambda* = %.12g, mu* = %.12g",
        iterations,
        lam_star,
        mu_star,
    )
    return _reassemble(network, cg, cut_solution, lam_star, mu_star, iterations)


def _reassemble(network, cg, cut_solution, lam_star, mu_star, iterations):
    derived = cg.derived
    node_rows = [derived.node_index[n] for n in network.node_ids]
    eta_node = cut_solution.eta_node[node_rows]
    p2 = cut_solution.p2[node_rows]

    q = np.empty(len(network.edges))
    eta_edge = np.empty(len(network.edges))
    for j, edge in enumerate(network.edges):
        if edge.id == cg.cut_edge:
            q[j] = lam_star
            upstream = edge.foot if lam_star >= 0.0 else edge.head
            eta_edge[j] = eta_node[network.node_index[upstream]]
        else:
            k = derived.edge_index[edge.id]
            q[j] = cut_solution.q[k]
            eta_edge[j] = cut_solution.eta_edge[k]

    undefined = [
        n
        for n in cut_solution.diagnostics.get("undefined_nodes", [])
        if n in network.node_index
    ]
    return Solution(
        network.node_ids,
        network.edge_ids,
        q,
        eta_node,
        eta_edge,
        p2,
        diagnostics={
            "solver_used": "cut",
            "iterations": iterations,
            "cut_edge": cg.cut_edge,
            "lambda_star": float(lam_star),
            "mu_star": float(mu_star),
            "warnings": [
                f"node '{n}' has no through-flow; composition set to 0"
                for n in undefined
            ],
            "undefined_nodes": undefined,
        },
    )

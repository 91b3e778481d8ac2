"""Structural checks of a solution against the network model."""

import logging

import networkx as nx
import numpy as np

from blendnet.network_core.errors import TopologyError
from blendnet.network_core.gas_physics import critical_length, pressure_drop_squared
from blendnet.network_core.network_model import flow_oriented
from blendnet.solvers.residual_solver import mixing_residual

logger = logging.getLogger(__name__)

FLOW_TOL = 1e-12
ETA_SLACK = 1e-6
HYDROGEN_TOL = 1e-6
PATH_TOL = 1e-9


def edge_pressure_drop(network, solution, edge_id):
    """p2[head] - p2[foot] predicted by the pipe law for `edge_id`."""
    j = network.edge_index[edge_id]
    edge = network.edges[j]
    return pressure_drop_squared(
        solution.eta_node[network.foot_index[j]],
        solution.eta_node[network.head_index[j]],
        solution.q[j],
        edge.length,
        edge.diameter,
        edge.friction,
        network.gas,
        check=False,
    )


def path_pressure_loss(network, solution, path):
    """Change of p2 along a node path, summed edge by edge from the pipe law.

    Parameters
    ----------
    network : Network
    solution : Solution
    path : sequence of str
        Node ids; consecutive nodes must share an edge. Among parallel edges
        the first one is used.

    Returns
    -------
    float
        Predicted p2[path[-1]] - p2[path[0]].
    """
    total = 0.0
    for start, end in zip(path[:-1], path[1:]):
        try:
            edge_id = next(iter(network.graph[start][end]))
        except KeyError:
            raise TopologyError(f"no edge joins '{start}' and '{end}'") from None
        drop = edge_pressure_drop(network, solution, edge_id)
        total += drop if network.edge(edge_id).foot == start else -drop
    return total


def has_circular_flow(network, q, tol=FLOW_TOL):
    """True if the flow runs all the way round some cycle of the network.

    A cycle counts when none of its edges carries flow against the direction
    of travel and at least one carries flow along it. Edges with |q| <= tol
    may be travelled either way, so such a cycle exists exactly when a
    flow-carrying edge has both ends in one strongly connected component.
    """
    g_flow = flow_oriented(network, q)
    for u, v, data in list(g_flow.edges(data=True)):
        if data["q"] <= tol:
            g_flow.add_edge(v, u, q=data["q"])
    component = {}
    for i, nodes in enumerate(nx.strongly_connected_components(g_flow)):
        component.update(dict.fromkeys(nodes, i))
    return any(
        component[u] == component[v]
        for u, v, data in g_flow.edges(data=True)
        if data["q"] > tol
    )


def hydrogen_balance(network, solution):
    """Hydrogen conservation residual per node, mixing denominator cleared."""
    return mixing_residual(network, solution.q, solution.eta_node)


def critical_lengths(network, solution):
    """Critical length per edge id, inf where the edge carries no flow."""
    lengths = {}
    p = solution.p
    for j, edge in enumerate(network.edges):
        q = solution.q[j]
        upstream = network.foot_index[j] if q >= 0 else network.head_index[j]
        if q == 0.0 or not p[upstream] > 0:
            lengths[edge.id] = float("inf")
            continue
        eta = float(np.clip(solution.eta_edge[j], 0.0, 1.0))
        lengths[edge.id] = critical_length(
            p[upstream], eta, abs(q), edge.diameter, edge.friction, network.gas
        )
    return lengths


def check_solution(network, solution):
    """Violated structural properties of `solution`, as messages.

    Checks the composition bounds, nodal hydrogen conservation, the absence
    of circular flow and pressure consistency along a spanning tree.
    """
    problems = []
    eta = solution.eta_node
    if np.any((eta < -ETA_SLACK) | (eta > 1.0 + ETA_SLACK)):
        problems.append("compositions outside [0, 1]")
    balance = np.max(np.abs(hydrogen_balance(network, solution)), initial=0.0)
    if balance > HYDROGEN_TOL:
        problems.append(f"hydrogen conservation violated by {balance:.3e}")
    if has_circular_flow(network, solution.q):
        problems.append("circular flow around a cycle")

    anchor = network.anchor
    if anchor is not None:
        origin = network.node_index[anchor]
        paths = nx.single_source_shortest_path(network.graph, anchor)
        for node_id, path in paths.items():
            predicted = path_pressure_loss(network, solution, path)
            actual = solution.p2[network.node_index[node_id]] - solution.p2[origin]
            scale = max(1.0, abs(solution.p2[origin]))
            if abs(predicted - actual) > PATH_TOL * scale:
                problems.append(
                    f"pressure at '{node_id}' inconsistent with the pipe law "
                    f"along {path}"
                )
                break
    for problem in problems:
        logger.warning("solution check: %s", problem)
    return problems

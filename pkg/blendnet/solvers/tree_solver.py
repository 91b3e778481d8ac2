"""Direct solver for tree-shaped networks.

On a tree the incidence matrix has full column rank, so mass conservation
fixes the flows. The flows fix the flow-oriented graph, whose topological
order lets the compositions be mixed node by node. Pressures then follow
from the pipe law, edge by edge outward from the pressure anchor.
"""

import logging
from collections import deque
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from blendnet.network_core.errors import (
    CompositionUndefinedError,
    InfeasibleNetworkError,
    TopologyError,
)
from blendnet.network_core.gas_physics import critical_length, pressure_drop_squared
from blendnet.network_core.network_model import flow_oriented, topological_order

logger = logging.getLogger(__name__)

# -------------------------------- Solution -----------------------------------


@dataclass
class Solution:
    """Steady state of a network for one set of boundary data.

    Arrays follow the dense node and edge order of the network.

    Attributes
    ----------
    node_ids, edge_ids : tuple of str
    q : ndarray
        Mixture flow per edge.
    eta_node : ndarray
        Hydrogen fraction per node.
    eta_edge : ndarray
        Hydrogen fraction per edge, taken from the upstream node.
    p2 : ndarray
        Squared pressure per node.
    diagnostics : dict
        Solver-specific information: solver_used, iterations, warnings and,
        for the cut solver, lambda_star, mu_star and the cut edge.
    """

    node_ids: tuple
    edge_ids: tuple
    q: np.ndarray
    eta_node: np.ndarray
    eta_edge: np.ndarray
    p2: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self):
        """Pressure per node; NaN where p2 is not positive."""
        with np.errstate(invalid="ignore"):
            return np.where(self.p2 > 0, np.sqrt(np.abs(self.p2)), np.nan)

    def flow(self, edge_id):
        return float(self.q[self.edge_ids.index(edge_id)])

    def composition(self, node_id):
        return float(self.eta_node[self.node_ids.index(node_id)])

    def pressure_squared(self, node_id):
        return float(self.p2[self.node_ids.index(node_id)])

    def to_dict(self):
        """Per-id mappings of every solution quantity."""
        return {
            "q": dict(zip(self.edge_ids, self.q.tolist())),
            "eta_node": dict(zip(self.node_ids, self.eta_node.tolist())),
            "eta_edge": dict(zip(self.edge_ids, self.eta_edge.tolist())),
            "p": dict(zip(self.node_ids, self.p.tolist())),
            "p2": dict(zip(self.node_ids, self.p2.tolist())),
        }


def edge_compositions(network, q, eta_node):
    """Composition carried by each edge: foot for q >= 0, head otherwise."""
    q = np.asarray(q, dtype=float)
    eta_node = np.asarray(eta_node, dtype=float)
    return np.where(
        q >= 0.0, eta_node[network.foot_index], eta_node[network.head_index]
    )


# -------------------------------- Tree solves --------------------------------


def _require_tree(network):
    if not network.is_tree:
        raise TopologyError(
            f"network is not a tree ({network.num_cycles} cycles); use "
            "cut_solver for a single cycle or residual_solver otherwise"
        )


def solve_flows(network):
    """Flows of a tree network from mass conservation A q = b.

    Degree-one nodes are eliminated repeatedly: the only edge left at a leaf
    must carry the leaf's remaining load.

    Parameters
    ----------
    network : Network
        Tree-shaped network with balanced loads.

    Returns
    -------
    q : ndarray
        Flow per edge.
    """
    _require_tree(network)
    remaining = network.loads.copy()
    q = np.zeros(len(network.edges))
    open_edges = {
        node_id: set(network.incident_edges(node_id))
        for node_id in network.node_ids
    }
    leaves = deque(n for n in network.node_ids if len(open_edges[n]) == 1)

    while leaves:
        leaf = leaves.popleft()
        if len(open_edges[leaf]) != 1:
            continue
        (edge_id,) = open_edges[leaf]
        edge = network.edge(edge_id)
        j = network.edge_index[edge_id]
        v = network.node_index[leaf]
        sign = -1.0 if edge.foot == leaf else 1.0
        q[j] = sign * remaining[v]
        remaining[v] = 0.0

        other = edge.head if edge.foot == leaf else edge.foot
        w = network.node_index[other]
        remaining[w] -= -sign * q[j]
        open_edges[leaf].discard(edge_id)
        open_edges[other].discard(edge_id)
        if len(open_edges[other]) == 1:
            leaves.append(other)
    return q


def solve_compositions(network, q, order_key=None, undefined=None):
    """Mix the compositions node by node along the flow.

    Every node takes the flow-weighted average of the compositions flowing
    in, with its own supply counted at its supply composition.

    Parameters
    ----------
    network : Network
    q : ndarray
        Flow per edge satisfying mass conservation.
    order_key : callable, optional
        Tie-break key of the topological order (ascending id by default).
    undefined : list, optional
        Receives the ids of nodes without inflow or outflow, whose
        composition is set to 0.

    Returns
    -------
    eta : ndarray
        Composition per node.
    """
    q = network.edge_array(q)
    g_flow = flow_oriented(network, q)
    order = topological_order(g_flow, key=order_key)

    eta = np.zeros(len(network.nodes))
    supply = np.maximum(-network.loads, 0.0)
    zeta = network.supply_compositions
    for node_id in order:
        v = network.node_index[node_id]
        numerator = zeta[v] * supply[v]
        denominator = supply[v]
        for upstream, _, data in g_flow.in_edges(node_id, data=True):
            if data["q"] > 0.0:
                numerator += eta[network.node_index[upstream]] * data["q"]
                denominator += data["q"]
        if denominator > 0.0:
            eta[v] = numerator / denominator
            continue
        if any(d["q"] > 0.0 for _, _, d in g_flow.out_edges(node_id, data=True)):
            raise CompositionUndefinedError(node_id)
        logger.warning(
            "node '%s' has no through-flow; its composition is set to 0", node_id
        )
        if undefined is not None:
            undefined.append(node_id)
    return eta


def solve_pressures(network, q, eta_node, eta_edge=None):
    """Squared pressures of a tree network from the pipe law.

    Starting at the pressure anchor, each edge fixes the squared pressure at
    its far end. This is the same as solving the reduced system with the
    anchor row removed.

    Parameters
    ----------
    network : Network
    q : ndarray
    eta_node : ndarray
    eta_edge : ndarray, optional
        Unused by the pipe law, which reads the upstream node; accepted for
        symmetry with `Solution`.

    Returns
    -------
    p2 : ndarray
        Squared pressure per node.

    Raises
    ------
    InfeasibleNetworkError
        If a squared pressure is not positive. The error names the first
        failing edge and its critical length.
    """
    _require_tree(network)
    q = network.edge_array(q)
    eta_node = np.asarray(eta_node, dtype=float)
    anchor = network.anchor
    p2 = np.full(len(network.nodes), np.nan)
    p2[network.node_index[anchor]] = network.anchor_pressure**2

    graph = network.graph
    for known, new in nx.bfs_edges(graph, anchor):
        edge_id = next(iter(graph[known][new]))
        edge = network.edge(edge_id)
        j = network.edge_index[edge_id]
        u = network.node_index[known]
        w = network.node_index[new]
        drop = pressure_drop_squared(
            eta_node[network.foot_index[j]],
            eta_node[network.head_index[j]],
            q[j],
            edge.length,
            edge.diameter,
            edge.friction,
            network.gas,
        )
        p2[w] = p2[u] + drop if edge.foot == known else p2[u] - drop
        if p2[w] <= 0.0:
            upstream = eta_node[network.foot_index[j]] if q[j] >= 0 else (
                eta_node[network.head_index[j]]
            )
            l_crit = critical_length(
                np.sqrt(p2[u]),
                upstream,
                abs(q[j]),
                edge.diameter,
                edge.friction,
                network.gas,
            )
            raise InfeasibleNetworkError(
                f"pressure vanishes along edge '{edge_id}': length "
                f"{edge.length:g} exceeds the critical length {l_crit:g}",
                edge_id=edge_id,
                length=edge.length,
                critical_length=l_crit,
            )
    return p2


def solve_tree(network, order_key=None):
    """Solve a tree-shaped network.

    Returns
    -------
    Solution
    """
    q = solve_flows(network)
    undefined = []
    eta_node = solve_compositions(network, q, order_key, undefined)
    eta_edge = edge_compositions(network, q, eta_node)
    p2 = solve_pressures(network, q, eta_node, eta_edge)
    warnings = [
        f"node '{node_id}' has no through-flow; composition set to 0"
        for node_id in undefined
    ]
    return Solution(
        network.node_ids,
        network.edge_ids,
        q,
        eta_node,
        eta_edge,
        p2,
        diagnostics={
            "solver_used": "tree",
            "iterations": 0,
            "warnings": warnings,
            "undefined_nodes": undefined,
        },
    )

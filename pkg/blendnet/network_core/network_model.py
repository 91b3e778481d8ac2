"""Data model of gas networks and the graph algorithms the solvers share.

A network is a directed multigraph. Every node carries a load (negative for
supplies, which also carry a supply composition) and exactly one node carries
the pressure anchor. Every edge is a pipe from its foot to its head.

Node and edge ids are strings; dense indices follow the input order and are
used for all matrix work.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Optional, Sequence

import networkx as nx
import numpy as np

from blendnet.network_core.errors import (
    GraphNotAcyclicError,
    TopologyError,
    UnknownIdError,
)
from blendnet.network_core.gas_physics import GasConstants
from blendnet.utilities.settings import gas_options

logger = logging.getLogger(__name__)

LOAD_SUM_TOL = 1e-12

# ------------------------------- Domain types --------------------------------


@dataclass(frozen=True)
class Node:
    """A junction of the network.

    Attributes
    ----------
    id : str
        Unique node id.
    load : float
        Boundary mass flow. Negative at supplies, nonnegative otherwise.
    supply_composition : float or None
        Hydrogen fraction of the supplied gas, required iff load < 0.
    pressure_anchor : float or None
        Fixed pressure, set on exactly one node of a network.
    """

    id: str
    load: float = 0.0
    supply_composition: Optional[float] = None
    pressure_anchor: Optional[float] = None

    @property
    def is_supply(self):
        return self.load < 0


@dataclass(frozen=True)
class Edge:
    """A pipe from `foot` to `head`."""

    id: str
    foot: str
    head: str
    length: float
    diameter: float = gas_options["diameter"]
    friction: float = gas_options["friction"]


@dataclass(frozen=True)
class Violation:
    """A violated network invariant, with node or edge attribution."""

    kind: str
    message: str
    node: Optional[str] = None
    edge: Optional[str] = None

    def __str__(self):
        where = ""
        if self.node is not None:
            where = f" [node {self.node}]"
        elif self.edge is not None:
            where = f" [edge {self.edge}]"
        return f"{self.kind}: {self.message}{where}"


@dataclass(frozen=True)
class Cycle:
    """A cycle given as nodes in traversal order and the edges between them.

    Edge i joins nodes[i] and nodes[(i + 1) % len(nodes)].
    """

    nodes: tuple
    edges: tuple

    def orientation(self, network):
        """Return +1 for edges traversed foot to head, -1 otherwise."""
        signs = []
        for i, edge_id in enumerate(self.edges):
            edge = network.edge(edge_id)
            start = self.nodes[i]
            signs.append(1 if edge.foot == start else -1)
        return np.array(signs, dtype=float)


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable gas network.

    Attributes
    ----------
    nodes : tuple of Node
    edges : tuple of Edge
    gas : GasConstants
    """

    nodes: Sequence[Node]
    edges: Sequence[Edge]
    gas: GasConstants = field(default_factory=GasConstants)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.gas == other.gas
        )

    def __hash__(self):
        return hash((self.nodes, self.edges, self.gas))

    def __repr__(self):
        return (
            f"Network(nodes={len(self.nodes)}, edges={len(self.edges)}, "
            f"cycles={self.num_cycles})"
        )

    # Lookups

    @cached_property
    def node_ids(self):
        return tuple(node.id for node in self.nodes)

    @cached_property
    def edge_ids(self):
        return tuple(edge.id for edge in self.edges)

    @cached_property
    def node_index(self):
        return {node_id: i for i, node_id in enumerate(self.node_ids)}

    @cached_property
    def edge_index(self):
        return {edge_id: i for i, edge_id in enumerate(self.edge_ids)}

    def node(self, node_id):
        try:
            return self.nodes[self.node_index[node_id]]
        except KeyError:
            raise UnknownIdError("node", node_id) from None

    def edge(self, edge_id):
        try:
            return self.edges[self.edge_index[edge_id]]
        except KeyError:
            raise UnknownIdError("edge", edge_id) from None

    def incident_edges(self, node_id):
        """Ids of the edges whose foot or head is `node_id`."""
        self.node(node_id)
        return self._incident[node_id]

    @cached_property
    def _incident(self):
        incident = {node_id: [] for node_id in self.node_ids}
        for edge in self.edges:
            for end in (edge.foot, edge.head):
                if end in incident and edge.id not in incident[end]:
                    incident[end].append(edge.id)
        return {k: tuple(v) for k, v in incident.items()}

    # Arrays used by the solvers

    @cached_property
    def loads(self):
        return np.array([node.load for node in self.nodes], dtype=float)

    @cached_property
    def supply_compositions(self):
        """Supply composition per node, 0 where the node supplies nothing."""
        return np.array(
            [node.supply_composition or 0.0 for node in self.nodes], dtype=float
        )

    @cached_property
    def foot_index(self):
        return np.array([self.node_index[e.foot] for e in self.edges], dtype=int)

    @cached_property
    def head_index(self):
        return np.array([self.node_index[e.head] for e in self.edges], dtype=int)

    @cached_property
    def lengths(self):
        return np.array([e.length for e in self.edges], dtype=float)

    @cached_property
    def diameters(self):
        return np.array([e.diameter for e in self.edges], dtype=float)

    @cached_property
    def frictions(self):
        return np.array([e.friction for e in self.edges], dtype=float)

    @cached_property
    def incidence(self):
        """Dense node-edge incidence matrix A with entries -1, 0, 1."""
        matrix = np.zeros((len(self.nodes), len(self.edges)))
        columns = np.arange(len(self.edges))
        matrix[self.foot_index, columns] = -1.0
        matrix[self.head_index, columns] = 1.0
        return matrix

    @cached_property
    def anchor(self):
        """Id of the node carrying the pressure anchor, None if not unique."""
        anchors = [n.id for n in self.nodes if n.pressure_anchor is not None]
        return anchors[0] if len(anchors) == 1 else None

    @property
    def anchor_pressure(self):
        if self.anchor is None:
            raise TopologyError("network needs exactly one pressure anchor")
        return self.node(self.anchor).pressure_anchor

    # Graph views

    @cached_property
    def graph(self):
        """Undirected multigraph keyed by edge id (unknown ends skipped)."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.node_ids)
        for edge in self.edges:
            if edge.foot in self.node_index and edge.head in self.node_index:
                graph.add_edge(edge.foot, edge.head, key=edge.id)
        return graph

    @cached_property
    def num_cycles(self):
        """Cycle rank |E| - |V| + (number of components)."""
        graph = self.graph
        return (
            graph.number_of_edges()
            - graph.number_of_nodes()
            + nx.number_connected_components(graph)
        )

    @cached_property
    def is_tree(self):
        return len(self.nodes) > 0 and (
            len(self.edges) == len(self.nodes) - 1 and nx.is_connected(self.graph)
        )

    # Derived networks

    def with_boundary(self, loads=None, compositions=None):
        """Return a copy with some node loads and supply compositions replaced.

        Parameters
        ----------
        loads : mapping, optional
            New load per node id.
        compositions : mapping, optional
            New supply composition (or None) per node id.
        """
        loads = loads or {}
        compositions = compositions or {}
        for node_id in list(loads) + list(compositions):
            self.node(node_id)
        nodes = []
        for node in self.nodes:
            changes = {}
            if node.id in loads:
                changes["load"] = float(loads[node.id])
            if node.id in compositions:
                changes["supply_composition"] = compositions[node.id]
            nodes.append(replace(node, **changes) if changes else node)
        network = Network(nodes, self.edges, self.gas)
        # Topology is unchanged, so the structural caches carry over.
        for name in _STRUCTURAL_CACHES:
            if name in self.__dict__:
                network.__dict__[name] = self.__dict__[name]
        return network

    def edge_array(self, values):
        """Coerce per-edge values (mapping or sequence) to an array."""
        if isinstance(values, Mapping):
            array = np.empty(len(self.edges))
            for edge_id, i in self.edge_index.items():
                array[i] = values[edge_id]
            return array
        array = np.asarray(values, dtype=float)
        if array.shape != (len(self.edges),):
            raise ValueError(
                f"expected {len(self.edges)} edge values, got {array.shape}"
            )
        return array


_STRUCTURAL_CACHES = (
    "node_ids",
    "edge_ids",
    "node_index",
    "edge_index",
    "_incident",
    "foot_index",
    "head_index",
    "lengths",
    "diameters",
    "frictions",
    "incidence",
    "graph",
    "num_cycles",
    "is_tree",
)


@dataclass(frozen=True)
class CutGraph:
    """A network with one edge split into two stub edges.

    The cut edge e = (f, h) is replaced by e_cl = (f, v_cl) and
    e_cr = (v_cr, h), each half as long as e. The new nodes v_cl and v_cr
    carry no load until boundary data is assigned.

    Attributes
    ----------
    base : Network
    cut_edge : str
    derived : Network
    v_cl, v_cr : str
        Ids of the new boundary nodes.
    e_cl, e_cr : str
        Ids of the stub edges.
    """

    base: Network
    cut_edge: str
    derived: Network
    v_cl: str
    v_cr: str
    e_cl: str
    e_cr: str

    @property
    def splits_network(self):
        """True if the cut edge was a bridge, leaving two components."""
        return not nx.is_connected(self.derived.graph)

    @property
    def is_tree(self):
        return self.derived.is_tree

    @cached_property
    def gap_path(self):
        """Node ids of a path from v_cr to v_cl and the edge ids along it."""
        graph = self.derived.graph
        nodes = nx.shortest_path(graph, self.v_cr, self.v_cl)
        edges = [next(iter(graph[a][b])) for a, b in zip(nodes[:-1], nodes[1:])]
        return tuple(nodes), tuple(edges)


# ------------------------------- Validation ----------------------------------


def validate(network):
    """Check every network invariant.

    Parameters
    ----------
    network : Network

    Returns
    -------
    list of Violation
        Empty iff the network is valid.
    """
    violations = []
    seen = set()
    for node in network.nodes:
        if node.id in seen:
            violations.append(
                Violation("duplicate-id", "node id used twice", node=node.id)
            )
        seen.add(node.id)
        if node.load < 0 and node.supply_composition is None:
            violations.append(
                Violation(
                    "supply-composition",
                    f"supply node (load {node.load}) has no supply composition",
                    node=node.id,
                )
            )
        if node.load >= 0 and node.supply_composition is not None:
            violations.append(
                Violation(
                    "supply-composition",
                    f"node with load {node.load} must not have a supply "
                    "composition",
                    node=node.id,
                )
            )
        zeta = node.supply_composition
        if zeta is not None and not 0.0 <= zeta <= 1.0:
            violations.append(
                Violation(
                    "supply-composition",
                    f"supply composition {zeta} is outside [0, 1]",
                    node=node.id,
                )
            )
        anchor = node.pressure_anchor
        if anchor is not None and not anchor > 0:
            violations.append(
                Violation(
                    "pressure-anchor",
                    f"pressure anchor {anchor} is not positive",
                    node=node.id,
                )
            )

    seen = set()
    for edge in network.edges:
        if edge.id in seen:
            violations.append(
                Violation("duplicate-id", "edge id used twice", edge=edge.id)
            )
        seen.add(edge.id)
        for end in (edge.foot, edge.head):
            if end not in network.node_index:
                violations.append(
                    Violation(
                        "unknown-node", f"edge ends at unknown node '{end}'",
                        edge=edge.id,
                    )
                )
        if edge.foot == edge.head:
            violations.append(
                Violation("self-loop", "foot and head coincide", edge=edge.id)
            )
        for name in ("length", "diameter", "friction"):
            value = getattr(edge, name)
            if not value > 0:
                violations.append(
                    Violation(
                        "pipe-parameter",
                        f"{name} {value} is not positive",
                        edge=edge.id,
                    )
                )

    anchors = [n for n in network.nodes if n.pressure_anchor is not None]
    if len(anchors) != 1:
        violations.append(
            Violation(
                "pressure-anchor",
                f"pressure anchor count is {len(anchors)}, expected exactly 1",
            )
        )

    total = math.fsum(node.load for node in network.nodes)
    if abs(total) > LOAD_SUM_TOL:
        violations.append(
            Violation("load-balance", f"loads do not sum to zero (sum = {total})")
        )

    if network.nodes and not nx.is_connected(network.graph):
        violations.append(Violation("connectivity", "graph is not connected"))
    return violations


# ------------------------------- Graph algorithms ----------------------------


def incidence_entry(network, v, e):
    """Entry a(v, e) of the incidence matrix.

    Returns
    -------
    int
        -1 if v is the foot of e, +1 if v is the head, 0 otherwise.
    """
    network.node(v)
    edge = network.edge(e)
    if v == edge.foot:
        return -1
    if v == edge.head:
        return 1
    return 0


def flow_oriented(network, q):
    """Reorient every edge along its flow.

    Parameters
    ----------
    network : Network
    q : mapping or sequence
        Flow per edge.

    Returns
    -------
    networkx.MultiDiGraph
        Same nodes; edge (v, w) keyed by the edge id for q >= 0 on (v, w) and
        for q < 0 on (w, v).
    """
    q = network.edge_array(q)
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(network.node_ids)
    for edge, flow in zip(network.edges, q):
        if flow >= 0:
            graph.add_edge(edge.foot, edge.head, key=edge.id, q=flow)
        else:
            graph.add_edge(edge.head, edge.foot, key=edge.id, q=-flow)
    return graph


def topological_order(graph, key=None):
    """Order the nodes of a DAG so that every edge points forward.

    Ties are broken by ascending node id, or by `key` when given.

    Raises
    ------
    GraphNotAcyclicError
        If the graph has a cycle.
    """
    try:
        return list(nx.lexicographical_topological_sort(graph, key=key))
    except nx.NetworkXUnfeasible:
        raise GraphNotAcyclicError("graph not acyclic") from None


def find_cycles(network):
    """Fundamental cycle basis of the undirected network.

    A spanning tree is built and every edge outside it closes one cycle with
    the tree path between its ends.

    Returns
    -------
    list of Cycle
        |E| - |V| + 1 cycles for a connected network, none for a tree.
    """
    graph = network.graph
    tree_edges = nx.minimum_spanning_edges(
        graph, algorithm="kruskal", keys=True, data=False
    )
    tree = nx.Graph()
    tree.add_nodes_from(graph.nodes)
    for u, v, key in tree_edges:
        tree.add_edge(u, v, key=key)
    in_tree = {data["key"] for _, _, data in tree.edges(data=True)}

    cycles = []
    for edge in network.edges:
        if edge.id in in_tree or edge.id not in network.edge_index:
            continue
        path = nx.shortest_path(tree, edge.head, edge.foot)
        path_edges = [
            tree[a][b]["key"] for a, b in zip(path[:-1], path[1:])
        ]
        cycles.append(Cycle(tuple(path), tuple(path_edges) + (edge.id,)))
    return cycles


def cut(network, cut_edge):
    """Split `cut_edge` into two stub edges ending at new boundary nodes.

    Parameters
    ----------
    network : Network
    cut_edge : str

    Returns
    -------
    CutGraph
        Check `CutGraph.splits_network` for bridges; a single-cycle solve
        needs a cut edge on the cycle.
    """
    edge = network.edge(cut_edge)
    v_cl = _fresh_id(f"{cut_edge}:v_cl", network.node_index)
    v_cr = _fresh_id(f"{cut_edge}:v_cr", network.node_index)
    e_cl = _fresh_id(f"{cut_edge}:e_cl", network.edge_index)
    e_cr = _fresh_id(f"{cut_edge}:e_cr", network.edge_index)

    half = edge.length / 2.0
    stubs = (
        Edge(e_cl, edge.foot, v_cl, half, edge.diameter, edge.friction),
        Edge(e_cr, v_cr, edge.head, half, edge.diameter, edge.friction),
    )
    edges = tuple(e for e in network.edges if e.id != cut_edge) + stubs
    nodes = network.nodes + (Node(v_cl), Node(v_cr))
    derived = Network(nodes, edges, network.gas)
    cut_graph = CutGraph(network, cut_edge, derived, v_cl, v_cr, e_cl, e_cr)
    if cut_graph.splits_network:
        logger.info("cut edge '%s' is a bridge; the cut graph is split", cut_edge)
    return cut_graph


def _fresh_id(candidate, taken):
    new_id = candidate
    suffix = 1
    while new_id in taken:
        new_id = f"{candidate}{suffix}"
        suffix += 1
    return new_id

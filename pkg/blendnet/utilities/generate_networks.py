"""Random network generators.

The networks are used to test the solvers. Loads are balanced integers and
the anchor pressure is high enough that no pipe reaches its critical length.
"""

import numpy as np
from numpy.random import default_rng

from blendnet.network_core.network_model import Edge, Network, Node

ANCHOR_PRESSURE = 100.0
FRICTION = 2e-8

# ---------------------------- Network generators -----------------------------


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else default_rng(seed)


def _random_nodes(num_nodes, rng, max_load):
    loads = rng.integers(-max_load, max_load + 1, num_nodes - 1)
    loads = np.append(loads, -loads.sum())
    if not np.any(loads < 0):
        loads[0] -= 1
        loads[-1] += 1
    nodes = []
    for i, load in enumerate(loads.tolist()):
        zeta = float(np.round(rng.uniform(0.0, 1.0), 3)) if load < 0 else None
        anchor = ANCHOR_PRESSURE if i == 0 else None
        nodes.append(Node(f"v{i}", float(load), zeta, anchor))
    return nodes


def _edge(index, u, v, rng):
    foot, head = (u, v) if rng.random() < 0.5 else (v, u)
    length = float(np.round(rng.uniform(0.5, 2.0), 3))
    return Edge(f"e{index}", foot, head, length, 1.0, FRICTION)


def random_tree(num_nodes, seed=None, max_load=5):
    """Random tree with balanced integer loads.

    Parameters
    ----------
    num_nodes : int
        At least 2.
    seed : int or numpy.random.Generator, optional
    max_load : int
        Loads of all but the last node are drawn from [-max_load, max_load].

    Returns
    -------
    Network
        Node ids v0, v1, ...; the anchor sits at v0 and every edge is
        oriented at random.
    """
    if num_nodes < 2:
        raise ValueError("a random tree needs at least 2 nodes")
    rng = _rng(seed)
    nodes = _random_nodes(num_nodes, rng, max_load)
    edges = [
        _edge(i - 1, f"v{int(rng.integers(0, i))}", f"v{i}", rng)
        for i in range(1, num_nodes)
    ]
    return Network(nodes, edges)


def random_single_cycle(num_nodes, seed=None, max_load=5):
    """Random network with exactly one cycle.

    A random tree gets one extra edge between two nodes that are not yet
    adjacent, which closes a cycle of length three or more.
    """
    if num_nodes < 3:
        raise ValueError("a single-cycle network needs at least 3 nodes")
    rng = _rng(seed)
    tree = random_tree(num_nodes, rng, max_load)
    adjacent = {frozenset((e.foot, e.head)) for e in tree.edges}
    candidates = [
        (f"v{i}", f"v{j}")
        for i in range(num_nodes)
        for j in range(i + 1, num_nodes)
        if frozenset((f"v{i}", f"v{j}")) not in adjacent
    ]
    u, v = candidates[int(rng.integers(0, len(candidates)))]
    chord = _edge(num_nodes - 1, u, v, rng)
    return Network(tree.nodes, tree.edges + (chord,), tree.gas)

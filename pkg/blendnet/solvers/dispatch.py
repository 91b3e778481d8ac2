"""Choose a solver by the number of independent cycles of a network."""

import logging

from blendnet.solvers.cut_solver import solve_single_cycle
from blendnet.solvers.residual_solver import default_init, solve_lm
from blendnet.solvers.tree_solver import solve_tree

logger = logging.getLogger(__name__)

SOLVERS = ("auto", "tree", "cut", "lm")


def choose_solver(network):
    """'tree' without cycles, 'cut' with one cycle, 'lm' otherwise."""
    cycles = network.num_cycles
    if cycles == 0:
        return "tree"
    if cycles == 1:
        return "cut"
    return "lm"


def solve(network, solver="auto", cut_edge=None, options=None, init=None):
    """Solve a network with the requested or the automatically chosen solver.

    Parameters
    ----------
    network : Network
    solver : {'auto', 'tree', 'cut', 'lm'}
    cut_edge : str, optional
        Cut edge for the cut solver.
    options : SolverOptions, optional
    init : UnknownVector, optional
        Starting point for the LM solver.

    Returns
    -------
    Solution
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver '{solver}', expected one of {SOLVERS}")
    if solver == "auto":
        solver = choose_solver(network)
    logger.info("solving %r with the %s solver", network, solver)

    if solver == "tree":
        return solve_tree(network)
    if solver == "cut":
        return solve_single_cycle(network, cut_edge=cut_edge, options=options)
    return solve_lm(network, init or default_init(network), options)

"""Exception hierarchy shared by the network model, the solvers and the CLI.

Every exception carries enough context to be reported without a traceback.
The command line maps each class to a stable exit status, see
`blendnet.cli.EXIT_CODES`.
"""

from typing import Optional, Sequence


class BlendNetError(Exception):
    """Base class for all errors raised by blendnet."""


class DomainError(BlendNetError, ValueError):
    """A value lies outside the domain of a formula (e.g. eta not in [0,1])."""


class UnknownIdError(BlendNetError, KeyError):
    """A node or edge id does not exist in the network."""

    def __init__(self, kind, item_id):
        self.kind = kind
        self.item_id = item_id
        super().__init__(f"unknown {kind} id '{item_id}'")

    def __str__(self):
        return self.args[0]


class NetworkDataError(BlendNetError):
    """The network data is malformed or violates a network invariant.

    Attributes
    ----------
    violations : list
        The `Violation` records found by `validate`, empty for parse errors.
    parse_error : bool
        True if the data could not be parsed at all (JSON or schema error).
    """

    def __init__(self, message, violations=(), parse_error=False):
        super().__init__(message)
        self.violations = list(violations)
        self.parse_error = parse_error


class TopologyError(BlendNetError):
    """The graph has the wrong shape for the requested operation."""


class GraphNotAcyclicError(TopologyError):
    """A topological ordering was requested for a graph with a cycle."""


class CompositionUndefinedError(BlendNetError):
    """Outflow leaves a node that has neither inflow nor supply."""

    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(
            f"composition at node '{node_id}' is undefined: gas leaves the "
            "node but nothing enters it"
        )


class InfeasibleNetworkError(BlendNetError):
    """The squared pressure becomes nonpositive somewhere in the network.

    Attributes
    ----------
    edge_id : str or None
        The first pipe along which the pressure vanishes.
    length : float or None
        Length of that pipe.
    critical_length : float or None
        Length after which the pressure in that pipe reaches zero.
    """

    def __init__(
        self,
        message,
        edge_id: Optional[str] = None,
        length: Optional[float] = None,
        critical_length: Optional[float] = None,
    ):
        super().__init__(message)
        self.edge_id = edge_id
        self.length = length
        self.critical_length = critical_length


class ConvergenceError(BlendNetError):
    """An iterative solver stopped without meeting its tolerance.

    Attributes
    ----------
    best : object
        Best iterate found (array for LM, lambda for bisection).
    residual : float
        Residual norm at the best iterate.
    iterations : int
        Number of iterations performed.
    bracket : tuple or None
        Final (lower, upper) bracket of a bisection.
    """

    def __init__(
        self,
        message,
        best=None,
        residual: float = float("nan"),
        iterations: int = 0,
        bracket: Optional[Sequence[float]] = None,
    ):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.iterations = iterations
        self.bracket = None if bracket is None else tuple(bracket)

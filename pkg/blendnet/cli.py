"""Command line interface of blendnet.

    blendnet validate FILE
    blendnet solve FILE [--solver {auto,tree,cut,lm}] [--cut-edge ID] [--out PATH]
    blendnet sweep FILE --out PREFIX [--cut-edge ID] [--lambda-range A B]
                        [--n-lambda N] [--n-mu M] [--raw-load-bound] [--workers K]
    blendnet root-curve FILE [--cut-edge ID] [--lambda-range A B] [--n-lambda N]
    blendnet g-curve FILE [--cut-edge ID] [--lambda-range A B] [--n-lambda N]

Exit status: 0 ok, 1 invalid data, 2 parse or usage error, 3 infeasible
network, 4 no convergence.
"""

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from blendnet.analysis.invariants import check_solution, critical_lengths
from blendnet.analysis.sweep_analysis import (
    CONVERGED,
    default_lambda_range,
    resolve_cut,
    restricted_g,
    root_curve,
    sweep,
)
from blendnet.network_core.errors import (
    BlendNetError,
    ConvergenceError,
    InfeasibleNetworkError,
    NetworkDataError,
    UnknownIdError,
)
from blendnet.network_core.network_model import validate
from blendnet.solvers.dispatch import SOLVERS, solve
from blendnet.solvers.residual_solver import UnknownVector, residual
from blendnet.solvers.tree_solver import Solution
from blendnet.utilities.network_io import (
    REPORT_FORMAT,
    grid_to_dict,
    load_network,
    write_curve_csv,
    write_grid_csv,
    write_json,
)
from blendnet.utilities.settings import DEFAULT_OPTIONS

logger = logging.getLogger(__name__)

EXIT_CODES = {
    "ok": 0,
    "invalid": 1,
    "parse": 2,
    "infeasible": 3,
    "not_converged": 4,
}

SWEEP_SUCCESS_FRACTION = 0.9

# ------------------------------- Run report ----------------------------------


@dataclass
class RunReport:
    """Outcome of a solve, as written by `blendnet solve`."""

    solver_used: str
    residual_max: float
    iterations: int
    solution: Solution
    warnings: list = field(default_factory=list)
    lambda_star: Optional[float] = None
    mu_star: Optional[float] = None
    cut_edge: Optional[str] = None
    critical_lengths: dict = field(default_factory=dict)

    @classmethod
    def from_solution(cls, network, solution):
        """Report on `solution`, recomputing its residual on `network`."""
        diagnostics = solution.diagnostics
        res = residual(network, UnknownVector.from_solution(solution))
        warnings = list(diagnostics.get("warnings", []))
        warnings += check_solution(network, solution)
        return cls(
            solver_used=diagnostics.get("solver_used", "unknown"),
            residual_max=res.max_abs(),
            iterations=int(diagnostics.get("iterations", 0)),
            solution=solution,
            warnings=warnings,
            lambda_star=diagnostics.get("lambda_star"),
            mu_star=diagnostics.get("mu_star"),
            cut_edge=diagnostics.get("cut_edge"),
            critical_lengths=critical_lengths(network, solution),
        )

    def to_dict(self):
        report = {
            "format": REPORT_FORMAT,
            "solver_used": self.solver_used,
            "residual_max": self.residual_max,
            "iterations": self.iterations,
            "warnings": self.warnings,
        }
        if self.lambda_star is not None:
            report["lambda_star"] = self.lambda_star
            report["mu_star"] = self.mu_star
            report["cut_edge"] = self.cut_edge
        report["critical_lengths"] = {
            k: (None if math.isinf(v) else v)
            for k, v in self.critical_lengths.items()
        }
        report["solution"] = self.solution.to_dict()
        return report


def exit_code(exc):
    """Exit status for an exception raised while running a command."""
    if isinstance(exc, NetworkDataError):
        return EXIT_CODES["parse"] if exc.parse_error else EXIT_CODES["invalid"]
    if isinstance(exc, InfeasibleNetworkError):
        return EXIT_CODES["infeasible"]
    if isinstance(exc, ConvergenceError):
        return EXIT_CODES["not_converged"]
    if isinstance(exc, UnknownIdError):
        return EXIT_CODES["parse"]
    if isinstance(exc, OSError):
        return EXIT_CODES["parse"]
    return EXIT_CODES["invalid"]


def _fail(exc):
    print(f"blendnet: error: {exc}", file=sys.stderr)
    if isinstance(exc, InfeasibleNetworkError) and exc.edge_id is not None:
        print(
            f"blendnet: edge '{exc.edge_id}' has length {exc.length:g}, "
            f"critical length {exc.critical_length:g}",
            file=sys.stderr,
        )
    return exit_code(exc)


# ------------------------------- Commands ------------------------------------


def cmd_validate(path, stream=None):
    """Print the violated invariants of a network file, one per line."""
    stream = stream or sys.stdout
    try:
        network = load_network(path, strict=False)
    except (NetworkDataError, OSError) as exc:
        return _fail(exc)
    violations = validate(network)
    for violation in violations:
        stream.write(f"{violation}\n")
    if violations:
        return EXIT_CODES["invalid"]
    stream.write(f"ok: {network!r}\n")
    return EXIT_CODES["ok"]


def cmd_solve(
    path, solver="auto", cut_edge=None, options=None, out=None, stream=None
):
    """Solve a network file and write the run report as JSON."""
    stream = stream or sys.stdout
    options = options or DEFAULT_OPTIONS
    try:
        network = load_network(path)
        solution = solve(network, solver, cut_edge=cut_edge, options=options)
    except (BlendNetError, OSError) as exc:
        return _fail(exc)

    report = RunReport.from_solution(network, solution)
    write_json(report.to_dict(), out, stream)
    if report.residual_max > options.residual_tol:
        print(
            f"blendnet: error: residual {report.residual_max:.3e} exceeds "
            f"{options.residual_tol:g}",
            file=sys.stderr,
        )
        return EXIT_CODES["not_converged"]
    return EXIT_CODES["ok"]


def _lambda_samples(network, cut_edge, lambda_range, n_lambda, raw_load_bound):
    cg = resolve_cut(network, cut_edge)
    if lambda_range is None:
        lambda_range = default_lambda_range(network, cg, raw_load_bound)
    return cg.cut_edge, np.linspace(lambda_range[0], lambda_range[1], n_lambda)


def cmd_sweep(
    path,
    out_prefix,
    cut_edge=None,
    lambda_range=None,
    n_lambda=50,
    n_mu=51,
    raw_load_bound=False,
    workers=None,
    solver="auto",
    options=None,
    stream=None,
):
    """Write the grid, root-curve and g artifacts of a sweep.

    Files: <prefix>_grid.csv, <prefix>_grid.json, <prefix>_root_curve.csv and
    <prefix>_g.csv.
    """
    stream = stream or sys.stdout
    if n_lambda < 2 or n_mu < 2:
        print(
            "blendnet: error: grid needs at least 2 points per axis",
            file=sys.stderr,
        )
        return EXIT_CODES["parse"]
    try:
        network = load_network(path)
        grid = sweep(
            network,
            cut_edge,
            lambda_range,
            n_lambda,
            n_mu,
            solver=solver,
            raw_load_bound=raw_load_bound,
            workers=workers,
            options=options,
        )
        curve = restricted_g(
            network, grid.cut_edge, grid.lambda_grid, solver, options
        )
    except (BlendNetError, OSError) as exc:
        return _fail(exc)

    write_grid_csv(grid, f"{out_prefix}_grid.csv")
    write_json(grid_to_dict(grid), f"{out_prefix}_grid.json")
    write_curve_csv(
        curve.lambda_samples,
        curve.mu_values,
        curve.status,
        "mu_eta",
        f"{out_prefix}_root_curve.csv",
    )
    write_curve_csv(
        curve.lambda_samples, curve.g, curve.status, "g", f"{out_prefix}_g.csv"
    )

    failed = int(np.sum(grid.status != CONVERGED))
    stream.write(
        f"cut edge {grid.cut_edge}: {grid.status.size - failed}/"
        f"{grid.status.size} grid points converged\n"
    )
    bracket = curve.sign_change()
    if bracket is not None:
        stream.write(f"lambda* in [{bracket[0]:.12g}, {bracket[1]:.12g}]\n")
    if grid.converged_fraction >= SWEEP_SUCCESS_FRACTION:
        return EXIT_CODES["ok"]
    return EXIT_CODES["not_converged"]


def _curve(
    value_name,
    path,
    cut_edge,
    lambda_range,
    n_lambda,
    raw_load_bound,
    solver,
    options,
    out,
    stream,
):
    stream = stream or sys.stdout
    if n_lambda < 1:
        print("blendnet: error: need at least one lambda sample", file=sys.stderr)
        return EXIT_CODES["parse"]
    try:
        network = load_network(path)
        cut_edge, samples = _lambda_samples(
            network, cut_edge, lambda_range, n_lambda, raw_load_bound
        )
        if value_name == "mu_eta":
            curve = root_curve(network, cut_edge, samples, solver, options)
            values = curve.mu_values
        else:
            curve = restricted_g(network, cut_edge, samples, solver, options)
            values = curve.g
    except (BlendNetError, OSError) as exc:
        return _fail(exc)
    write_curve_csv(samples, values, curve.status, value_name, out, stream)
    return EXIT_CODES["ok"]


def cmd_root_curve(
    path,
    cut_edge=None,
    lambda_range=None,
    n_lambda=50,
    raw_load_bound=False,
    solver="auto",
    options=None,
    out=None,
    stream=None,
):
    """Write the root curve mu_eta(lambda) as CSV."""
    return _curve(
        "mu_eta",
        path,
        cut_edge,
        lambda_range,
        n_lambda,
        raw_load_bound,
        solver,
        options,
        out,
        stream,
    )


def cmd_g_curve(
    path,
    cut_edge=None,
    lambda_range=None,
    n_lambda=50,
    raw_load_bound=False,
    solver="auto",
    options=None,
    out=None,
    stream=None,
):
    """Write g(lambda) = H_p on the root curve as CSV."""
    return _curve(
        "g",
        path,
        cut_edge,
        lambda_range,
        n_lambda,
        raw_load_bound,
        solver,
        options,
        out,
        stream,
    )


# ------------------------------- Entry point ---------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="blendnet",
        description="Steady states of hydrogen-blended gas networks.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    validate_cmd = commands.add_parser("validate", help="check a network file")
    validate_cmd.add_argument("file")

    solve_cmd = commands.add_parser("solve", help="solve a network file")
    solve_cmd.add_argument("file")
    solve_cmd.add_argument("--solver", choices=SOLVERS, default="auto")
    solve_cmd.add_argument("--cut-edge")
    solve_cmd.add_argument("--out", help="report path (stdout by default)")
    _add_solver_flags(solve_cmd)

    sweep_cmd = commands.add_parser("sweep", help="sample H_p and H_eta")
    sweep_cmd.add_argument("file")
    sweep_cmd.add_argument("--out", required=True, help="artifact path prefix")
    sweep_cmd.add_argument("--n-mu", type=int, default=51)
    sweep_cmd.add_argument("--workers", type=int)
    _add_curve_flags(sweep_cmd)
    _add_solver_flags(sweep_cmd)

    for name, help_text in (
        ("root-curve", "sample the root curve mu_eta(lambda)"),
        ("g-curve", "sample g(lambda) along the root curve"),
    ):
        curve_cmd = commands.add_parser(name, help=help_text)
        curve_cmd.add_argument("file")
        curve_cmd.add_argument("--out", help="CSV path (stdout by default)")
        _add_curve_flags(curve_cmd)
        _add_solver_flags(curve_cmd)
    return parser


def _add_curve_flags(parser):
    parser.add_argument("--cut-edge")
    parser.add_argument(
        "--lambda-range", type=float, nargs=2, metavar=("A", "B")
    )
    parser.add_argument("--n-lambda", type=int, default=50)
    parser.add_argument("--raw-load-bound", action="store_true")
    parser.add_argument(
        "--solver",
        choices=SOLVERS,
        default="auto",
        help="solver for the cut network",
    )


def _add_solver_flags(parser):
    parser.add_argument("--tol-p", type=float, help="tolerance on |g|")
    parser.add_argument("--max-iter", type=int, help="iteration limit")
    parser.add_argument("--nu0", type=float, help="initial LM damping")
    parser.add_argument("--residual-tol", type=float)


def _options(args):
    return DEFAULT_OPTIONS.updated(
        tol_p=args.tol_p,
        max_iter_bisect=args.max_iter,
        lm_max_iter=args.max_iter,
        nu0=args.nu0,
        residual_tol=args.residual_tol,
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    if args.command == "validate":
        return cmd_validate(args.file)
    options = _options(args)
    if args.command == "solve":
        return cmd_solve(
            args.file, args.solver, args.cut_edge, options, args.out
        )
    lambda_range = tuple(args.lambda_range) if args.lambda_range else None
    if args.command == "sweep":
        if args.n_lambda < 2 or args.n_mu < 2:
            parser.error("the grid needs at least 2 points per axis")
        return cmd_sweep(
            args.file,
            args.out,
            args.cut_edge,
            lambda_range,
            args.n_lambda,
            args.n_mu,
            args.raw_load_bound,
            args.workers,
            args.solver,
            options,
        )
    command = cmd_root_curve if args.command == "root-curve" else cmd_g_curve
    return command(
        args.file,
        args.cut_edge,
        lambda_range,
        args.n_lambda,
        args.raw_load_bound,
        args.solver,
        options,
        args.out,
    )


if __name__ == "__main__":
    sys.exit(main())

"""Script that distributes a (lambda, mu) sweep over MPI ranks.

Rank 0 splits the lambda rows of the grid and scatters them; every rank
solves its rows and rank 0 gathers them and writes the same grid files as
`blendnet sweep`.

Run this using the following command format:
    `mpiexec -np 4 python sweep_mpi.py data/diamond.json e8 out/diamond`
"""

import sys

import numpy as np
from mpi4py import MPI

from blendnet.analysis.sweep_analysis import (
    SweepGrid,
    default_lambda_range,
    resolve_cut,
    sweep_rows,
)
from blendnet.utilities.network_io import (
    grid_to_dict,
    load_network,
    write_grid_csv,
    write_json,
)

n_lambda = 50
n_mu = 51

comm = MPI.COMM_WORLD
size = comm.Get_size()
rank = comm.Get_rank()
wt_start = MPI.Wtime()

path, cut_edge, out_prefix = sys.argv[1:4]
network = load_network(path)
cut_graph = resolve_cut(network, cut_edge)
mu_grid = np.linspace(0.0, 1.0, n_mu)

if rank == 0:
    lam_min, lam_max = default_lambda_range(network, cut_graph)
    lambda_grid = np.linspace(lam_min, lam_max, n_lambda)
    data = np.array_split(lambda_grid, size)
else:
    data = None
rows = comm.scatter(data, root=0)

hp, heta, status = sweep_rows(cut_graph, rows, mu_grid)
print(
    f"Rank: {rank}, {len(rows)} rows, elapsed time:"
    f" {(MPI.Wtime()-wt_start):0.1f} s"
)

gathered = comm.gather((rows, hp, heta, status), root=0)

if rank == 0:
    grid = SweepGrid(
        np.concatenate([part[0] for part in gathered]),
        mu_grid,
        np.vstack([part[1] for part in gathered]),
        np.vstack([part[2] for part in gathered]),
        np.vstack([part[3] for part in gathered]),
        cut_graph.cut_edge,
    )
    write_grid_csv(grid, f"{out_prefix}_grid.csv")
    write_json(grid_to_dict(grid), f"{out_prefix}_grid.json")
    print(
        f"{100 * grid.converged_fraction:0.1f}% converged, elapsed time:"
        f" {(MPI.Wtime()-wt_start):0.1f} s"
    )

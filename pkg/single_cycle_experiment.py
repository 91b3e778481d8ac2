"""Script that closes the single cycle of the Table 1 network.

Prints the cut-flow interval, the cycle flow found by the cut solver and by
Levenberg-Marquardt, and a table of g on a uniform lambda grid.
"""

import time

import numpy as np

from blendnet.analysis.sweep_analysis import restricted_g
from blendnet.network_core.network_model import cut
from blendnet.solvers.cut_solver import gamma_constants, solve_single_cycle
from blendnet.solvers.residual_solver import (
    UnknownVector,
    default_init,
    residual,
    solve_lm,
)
from blendnet.utilities.network_io import load_network

# -----------------------------------------------------------------------------

network = load_network("data/single_cycle.json")
cut_graph = cut(network, "e0")
gamma = gamma_constants(cut_graph)
print(f"[gamma_min, gamma_max] = [{gamma.gamma_min:g}, {gamma.gamma_max:g}]")

start = time.time()
solution = solve_single_cycle(network, cut_edge="e0")
elapsed1 = time.time() - start
lam_star = solution.diagnostics["lambda_star"]
mu_star = solution.diagnostics["mu_star"]
print(f"cut: lambda* = {lam_star:.12f}, mu* = {mu_star:.12f}")
bisections = solution.diagnostics["iterations"]
print(f"     {bisections} bisections in {elapsed1*1000:0.1f} ms")

start = time.time()
lm_solution = solve_lm(network, default_init(network))
elapsed2 = time.time() - start
print(f"LM:  q[e0] = {lm_solution.flow('e0'):.12f}")
iterations = lm_solution.diagnostics["iterations"]
print(f"     {iterations} iterations in {elapsed2*1000:0.1f} ms")

res = residual(network, UnknownVector.from_solution(solution)).max_abs()
diff = np.max(np.abs(solution.q - lm_solution.q))
print(f"cut residual {res:.2e}, max flow difference to LM {diff:.2e}\n")

samples = np.linspace(gamma.gamma_min, gamma.gamma_max, 50)
curve = restricted_g(network, "e0", samples)
print(f"{'lambda':>10} {'mu_eta':>10} {'g':>14}")
for lam, mu, g in zip(curve.lambda_samples, curve.mu_values, curve.g):
    print(f"{lam:>10.4f} {mu:>10.6f} {g:>14.6e}")

"""Two routes to the same expectation: simulate the jump process, or solve its Kolmogorov equation.

Run: python demos/monte_carlo_vs_solver.py
"""

import numpy as np

from raremut import SimplexState, TwoSpeciesParams, monte_carlo_expectation, solve, solution_X, solution_Z
from raremut.kolmogorov import SolverConfig

p = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=0.5)
m, channels = p.model(), p.channels()
t = 1.0

u = solve(m, channels, SolverConfig(dt=1e-3, t_end=t))[0]
print(f"{'x0':>4}  {'Monte Carlo':>18}  {'solver':>8}  {'X (lower)':>9}  {'Z (gamma=1)':>11}")
for x0 in (0.1, 0.5, 0.9):
    est = monte_carlo_expectation(m, channels, SimplexState([1 - x0, x0]), [t], 20_000, seed=5)
    mean, se = est.mean[0, 1], est.std_error[0, 1]
    ref = float(u([x0])[0])
    print(f"{x0:4.1f}  {mean:.4f} +/- {se:.4f}  {ref:8.4f}  {float(solution_X(p, x0, t)):9.4f}"
          f"  {float(solution_Z(p.with_gamma0(1.0), x0, t)):11.4f}")

nodes = u.mesh.nodes[:, 0]
gap = u.values - solution_X(p, nodes, t)
print(f"\nsolver minus quasispecies lower bound on the mesh: min {gap.min():.2e}, max {gap.max():.4f}")
print(f"largest value: {u.values.max():.6f}")
assert np.all(gap >= -5e-3)

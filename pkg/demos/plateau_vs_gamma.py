"""How the large-time expected frequency of the fitter type depends on the jump fraction.

Total mutation pressure m0 f0 = 0.5 is held fixed while gamma varies, so
small gamma means frequent small jumps and gamma near 1 means rare jumps
that move almost all of the ancestor mass at once. The quasispecies
equilibrium mf/s = 0.5 is the small-jump limit.

Run: python demos/plateau_vs_gamma.py
"""

from raremut import TwoSpeciesParams, equilibrium_xbar, gamma_star
from raremut.two_species import find_plateau

p = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=0.5)
g_star = gamma_star(p.s, p.mf0)
print(f"s = {p.s:g}, m0 f0 = {p.mf0:g}, quasispecies equilibrium = {equilibrium_xbar(p):g}")
print(f"gamma* = {g_star:.6f}\n")
print(f"{'gamma':>6}  {'plateau':>8}  {'flat by t':>9}")
for gamma in (0.05, 0.2, 0.35, 0.5, 0.65, 0.95):
    pl = find_plateau(p, gamma)
    print(f"{gamma:6.2f}  {pl.value:8.4f}  {pl.time:9.0f}")
print("\nThe plateau increases with gamma, from near the quasispecies value toward 1.")

"""
The self-gravitating ground state
=================================

The Schroedinger-Newton ground state for a few masses. Doubling the mass
shrinks the soliton eightfold and deepens its energy 32 times.
"""

from gravirrev.sn_solver import RadialGrid, shooting_eigenvalue, solve_ground_state

print("shooting eigenvalue:", shooting_eigenvalue())
prev = None
for m in (1e-17, 2e-17, 4e-17):
    sol = solve_ground_state(m, RadialGrid.for_mass(m, 30.0, 2000))
    line = f"m = {m:.0e} kg  peak r = {sol.peak_radius:.4e} m  E = {sol.energy_eigenvalue:.4e} J"
    if prev is not None:
        line += f"  ratios {prev.peak_radius / sol.peak_radius:.3f}, {sol.energy_eigenvalue / prev.energy_eigenvalue:.3f}"
    print(line)
    prev = sol

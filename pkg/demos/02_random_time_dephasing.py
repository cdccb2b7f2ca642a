"""
Dephasing from a random flow of time
====================================

Every member of the ensemble runs its clock at a slightly different rate
``1 + delta``. Averaging over delta damps the off-diagonal entries of the
density matrix while the populations stay put.
"""

import json
from importlib.resources import files

import numpy as np

from gravirrev.dephasing import DeltaDistribution, EnergySpectrum, analytic_averaged_density, ensemble_series

spec = EnergySpectrum.from_json(json.loads((files("gravirrev") / "data" / "three_level_spectrum.json").read_text()))
times = np.linspace(0.0, 0.06, 7)

for kind in ("gaussian", "uniform"):
    dist = DeltaDistribution(kind, 0.05)
    est = ensemble_series(spec, dist, times, 20_000, seed=2)
    print(f"\n{kind} delta, sigma = 0.05")
    print("    t [s]   |rho_01| MC   |rho_01| exact   SE")
    for k, t in enumerate(times):
        exact = analytic_averaged_density(spec, dist, t).entries[0, 1]
        print(f"  {t:7.3f}   {abs(est.rho[k].entries[0, 1]):.5f}      {abs(exact):.5f}        "
              f"{est.std_error[k][0, 1]:.1e}")

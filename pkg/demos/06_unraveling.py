"""
Stochastic Schroedinger trajectories
====================================

Each trajectory stays pure under its own noise record. Their average
reproduces the master-equation density matrix.
"""

import json
from importlib.resources import files

import numpy as np

from gravirrev.master_eq import evolve, system_from_json, unravel

sys_, psi = system_from_json(json.loads((files("gravirrev") / "data" / "two_site_cat.json").read_text()))
dt, steps = 1e-4, 200
det = evolve(psi, sys_, dt * steps, dt).states[-1].entries

for n in (50, 200, 1000):
    ur = unravel(psi, sys_, dt, steps, n, seed=7)
    err = np.abs(ur.rho.entries - det).max()
    print(f"{n:5d} trajectories: max error {err:.4f}, typical SE {ur.std_error.max():.4f}")

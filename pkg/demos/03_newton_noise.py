"""
Correlated gravitational noise on a lattice
===========================================

Three cells, a regularized Newton kernel and a sampled noise record whose
covariance reproduces ``hbar K dt``.
"""

import json
from importlib.resources import files

from gravirrev.constants import HBAR
from gravirrev.kernel import MassConfiguration, build_newton_kernel, sample_noise

cfg = MassConfiguration.from_json(json.loads((files("gravirrev") / "data" / "three_cells.json").read_text()))
ker = build_newton_kernel(cfg, sigma_reg=1e-7)
print("kernel [m^3 kg^-1 s^-2]:\n", ker.matrix)
print("eigenvalues:", ker.eigenvalues)

dt = 1e-3
w = sample_noise(ker, True, dt, 200_000, seed=5).increments
print("sample covariance / (hbar K dt):\n", (w.T @ w / len(w)) / (HBAR * ker.matrix * dt))

"""
Energy drift and the superscattering map
========================================

The noise does not commute with a hopping Hamiltonian, so a ground state
heats up. The same dynamics packaged as a linear map on density matrices
is completely positive and trace preserving.
"""

import numpy as np

from gravirrev.constants import HBAR
from gravirrev.master_eq import evolve, heating_rate, lattice_particle_system, superscattering_map
from gravirrev.qstate import StateVector, projector, purity

sys_ = lattice_particle_system([[i * 2e-7, 0, 0] for i in range(4)], 1e-14, 1e-7, hopping=HBAR * 50)
ground = np.linalg.eigh(sys_.hamiltonian.entries)[1][:, 0]
hr = heating_rate(evolve(ground, sys_, 5e-4, 1e-6))
print(f"heating: slope {hr.slope:.4e} J/s, formula {hr.time_average:.4e} J/s")

smap = superscattering_map(sys_, 0.01)
print("trace error:", smap.trace_preservation_error())
print("Choi min eigenvalue:", smap.choi_min_eigenvalue())
cat = projector(StateVector.normalized([1, 0, 0, 1]))
print("cat purity:", purity(cat), "->", purity(smap.apply(cat)))

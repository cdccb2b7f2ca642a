"""
Integrating the master equation
===============================

A hopping particle on a short chain. The run carries its own diagnostics:
trace drift, Hermiticity, the smallest eigenvalue and purity.
"""

import json
from importlib.resources import files

from gravirrev.master_eq import evolve, system_from_json

sys_, psi = system_from_json(json.loads((files("gravirrev") / "data" / "two_site_cat.json").read_text()))
res = evolve(psi, sys_, t_final=0.05, dt=1e-4)

print("   t [s]    |rho_01|   purity   min eig")
for k in range(0, len(res.times), 50):
    print(f"  {res.times[k]:.4f}   {abs(res.entry(0, 1)[k]):.5f}   {res.purity[k]:.5f}   {res.min_eigenvalue[k]:+.1e}")
print("max trace drift:", res.trace_drift.max())

"""
How fast a gravitational cat loses coherence
============================================

A mass in superposition of two places decoheres at a rate set by the
difference of its two mass distributions weighted by the kernel.
"""

from gravirrev.kernel import MassConfiguration
from gravirrev.master_eq import cat_decay_rate, cat_system, evolve, fit_decay_rate
from gravirrev.qstate import StateVector

m, sigma = 1e-14, 1e-7
left = MassConfiguration([[0, 0, 0]], [m])
for d in (5e-8, 1e-7, 2e-7, 5e-7, 1e-6):
    right = MassConfiguration([[d, 0, 0]], [m])
    rate = cat_decay_rate(left, right, sigma)
    res = evolve(StateVector.normalized([1, 1]), cat_system(left, right, sigma), 4 / rate, 0.01 / rate)
    print(f"d = {d:.0e} m   rate {rate:10.4f} /s   fitted {fit_decay_rate(res.times, res.entry(0, 1)):10.4f} /s")

# far apart, the rate saturates at twice the self-energy term
print("saturation:", cat_decay_rate(left, MassConfiguration([[1.0, 0, 0]], [m]), sigma))

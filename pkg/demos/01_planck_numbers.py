"""
Sub-Planckian wavelengths of everyday objects
=============================================

A one kilogram ball moving at a kilometre per second has a de Broglie
wavelength far below the Planck length.
"""

from gravirrev import constants

report = constants.planck_regime_report(1.0, 1000.0)
for key, value in report.to_dict().items():
    print(f"{key:24s} {value}")

# the entropy of a horizon grows with its area
for area in (1e-70, 1.0, 4 * 3.14159 * 6.4e6**2):
    print(f"area {area:.3e} m^2 -> S = {constants.bekenstein_entropy(area):.3e} J/K")

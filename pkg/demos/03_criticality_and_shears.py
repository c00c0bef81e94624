"""
Critical foliations and sheared leaves on the flat torus
========================================================

Distance foliations are critical points of the modulus.  Shearing the
leaves to ``r = t + eps sin(theta)`` breaks criticality and lowers the
modulus.
"""

import numpy as np

from foliamod import (GridChart, WarpProfile, first_variation, p_modulus, radial_foliation,
                      random_fields, shear_foliation)
from foliamod.variation import critical_residual

torus = WarpProfile.torus(1.0)
chart = GridChart(torus, 64, 128, "surface")

# the criticality equation holds to rounding on the distance foliation
dist = radial_foliation(chart)
print("residual, distance   ", np.max(np.abs(critical_residual(dist, 2.0))))
print("residual, eps = 0.3  ", np.max(np.abs(critical_residual(shear_foliation(chart, 0.3), 2))))

# first variations of the distance foliation vanish along smooth fields
for f in random_fields(torus, 3, seed=1):
    print(f"first variation along {f.name}: {first_variation(dist, 2.0, f):.2e}")

# the modulus is maximal at eps = 0
for p in (2.0, 3.0):
    values = [p_modulus(shear_foliation(chart, eps), p).value for eps in (-0.1, -0.05, 0, 0.05, 0.1)]
    print(f"p={p:g} mod(eps) for eps in [-0.1, -0.05, 0, 0.05, 0.1]:", np.round(values, 12))

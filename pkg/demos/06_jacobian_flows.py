"""
Jacobians of flows
==================

Second derivatives of the leaf and full Jacobians of a flow, in closed
form and from differences of numerically flowed frames.  The dilation
``r d/dr`` of the plane gives 1 and 4, rotations give 0, and
``sin(theta) d/dr`` on the torus gives ``cos(theta)^2`` along the leaves.
"""

import numpy as np

from foliamod import GeneralField, GridChart, ScalarField, WarpProfile, jacobian_flow_check
from foliamod.foliation import random_general_fields

zero = ScalarField(lambda r, t: 0 * r, lambda r, t: 0 * r, lambda r, t: 0 * r)
dilation = GeneralField(ScalarField(lambda r, t: r + 0 * t, lambda r, t: 1 + 0 * r,
                                    lambda r, t: 0 * r), zero, name="r d/dr")
wobble = GeneralField(ScalarField(lambda r, t: np.sin(t) + 0 * r, lambda r, t: 0 * r,
                                  lambda r, t: np.cos(t) + 0 * r), zero, name="sin d/dr")

chk = jacobian_flow_check(dilation, GridChart(WarpProfile.euclidean(1, 2), 8, 8, "surface"))
print("r d/dr: leaf", chk.analytic.d2_leaf.flat[0], "full", chk.analytic.d2_full.flat[0],
      "flow difference gap", chk.discrepancy)

chk = jacobian_flow_check(wobble, GridChart(WarpProfile.torus(), 8, 8, "surface"))
print("sin d/dr leaf values ", np.round(chk.analytic.d2_leaf[0], 6))
print("cos^2 theta          ", np.round(np.cos(chk.theta[0]) ** 2, 6))

band = WarpProfile.spherical(np.pi / 4, 3 * np.pi / 4)
for X in random_general_fields(band, 3, seed=17):
    gap = jacobian_flow_check(X, GridChart(band, 8, 16, "surface")).discrepancy
    print(f"{X.name}: relative gap {gap:.2e}")

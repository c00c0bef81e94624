"""
Second variation on the flat torus
==================================

Moving the circles of the unit flat torus along ``X = sin(theta) N`` gives
second variation ``-1/(2 pi)`` at ``p = 2``.  The same number comes out of
a five-point difference of the modulus along the actual flow of ``X``.
"""

import numpy as np

from foliamod import GridChart, NormalField, WarpProfile, radial_foliation, second_variation

fol = radial_foliation(GridChart(WarpProfile.torus(1.0), 64, 128, "surface"))
sin = NormalField(lambda r, th: np.sin(th) + 0 * r, lambda r, th: 0 * r,
                  lambda r, th: np.cos(th) + 0 * r, name="sin-theta")

rep = second_variation(fol, 2.0, sin, fd_step=0.05)
print("A (gradient and curvature part) ", rep.A)
print("B (leaf average part)           ", rep.B)
print("total                           ", rep.total)
print("-1 / (2 pi)                     ", -1 / (2 * np.pi))
print("flow difference estimate        ", rep.fd_value)

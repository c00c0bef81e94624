"""
Modulus of the distance foliation of an annulus
===============================================

The leaves are the circles ``{r = t}``.  The extremal function is
``1 / (2 pi r)`` and the 2-modulus of the planar annulus ``[1, e]`` is
``1 / (2 pi)``.
"""

import numpy as np

from foliamod import GridChart, WarpProfile, extremal_function, p_modulus, radial_foliation

# flat plane in polar coordinates: dr^2 + r^2 dtheta^2 on 1 <= r <= e
annulus = WarpProfile.euclidean(1.0, np.e)
fol = radial_foliation(GridChart(annulus, 2048))

rep = p_modulus(fol, 2.0)
print("mod_2           ", rep.value)
print("1 / (2 pi)      ", 1 / (2 * np.pi))
print("int f0^2        ", rep.extremal_integral)

# the extremal function integrates to one over every leaf
f0 = extremal_function(fol, 2.0)
print("max |f0^ - 1|   ", f0.normalization_residual)
print("f0 * 2 pi r     ", (np.asarray(f0)[::512, 0] * 2 * np.pi * fol.t[::512]))

# higher exponents and a 3-dimensional shell
for p in (1.5, 3.0):
    print(f"mod_{p:g} annulus  ", p_modulus(fol, p).value)
shell = radial_foliation(GridChart(WarpProfile.euclidean(1.0, 2.0, fiber_dim=2), 2048))
print("mod_2 shell     ", p_modulus(shell, 2.0).value, "vs 1/(8 pi) =", 1 / (8 * np.pi))

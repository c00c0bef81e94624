"""
Condenser capacity and the modulus of the level sets of the potential
=====================================================================

For conjugate exponents the q-capacity of a radial condenser and the
p-modulus of the foliation by level sets of its q-harmonic potential obey
``mod_p = cap_q^(1 - p)``.
"""

import numpy as np

from foliamod import Condenser, WarpProfile, capacity_q, q_harmonic_radial
from foliamod.capacity import nu_spread

bands = {
    "plane [1, 2]": WarpProfile.euclidean(1.0, 2.0),
    "hyperbolic [1, 2]": WarpProfile.hyperbolic(1.0, 2.0),
    "sphere [pi/4, 3pi/4]": WarpProfile.spherical(np.pi / 4, 3 * np.pi / 4),
}

for name, prof in bands.items():
    for p in (1.5, 2.0, 3.0):
        q = p / (p - 1)
        rep = capacity_q(Condenser(prof), q)
        print(f"{name:22s} p={p:<4g} cap_q={rep.value:.10f}  mod_p={rep.modulus:.10f}  "
              f"mod_p * cap_q^(p-1) = {rep.modulus * rep.value ** (p - 1):.14f}")

# the potential on the plane is logarithmic and its level weight nu is constant
cond = Condenser(bands["plane [1, 2]"])
u = q_harmonic_radial(cond, 2.0)
r = np.linspace(1, 2, 5)
print("u(r)            ", u(r))
print("log r / log 2   ", np.log(r) / np.log(2))
print("spread of nu    ", nu_spread(cond, 2.0))

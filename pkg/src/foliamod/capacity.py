"""q-capacity of radial condensers and the modulus-capacity relation.

For the condenser bounded by the leaves ``{r = a}`` and ``{r = b}`` the
q-harmonic potential is radial with first integral
``sigma |u'|^(q-2) u' = const``, so

    u'(r) = C sigma(r)^(-1/(q-1)),   C = 1 / int_a^b sigma^(-1/(q-1)) dr,
    cap_q = C^(q-1),

and the foliation by level sets of ``u`` has ``mod_p = cap_q^(1-p)``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError
from .foliation import LevelSetFunction
from .geometry import GridChart
from .modulus import ModulusParams, conjugate_exponent, nu_q, p_modulus, q_laplacian

QUAD = dict(epsabs=0.0, epsrel=1e-13, limit=200)


@dataclass(frozen=True)
class Condenser:
    """Warped product over ``[a, b]`` with plates ``{r = a}`` and ``{r = b}``."""

    profile: object

    def __post_init__(self):
        if self.profile.periodic:
            raise DomainError("a condenser needs an interval base, not a circle")
        a, b = self.profile.base
        if not (self.profile.sigma(a) > 0 and self.profile.sigma(b) > 0):
            raise DomainError("condenser plates must have positive volume")

    @property
    def plates(self):
        return self.profile.base


def _quad(fn, a, b):
    value, _ = integrate.quad(fn, a, b, **QUAD)
    if not np.isfinite(value) or value <= 0:
        raise NumericalError(f"normalisation integral is {value}")
    return value


def _constant(cond, q):
    a, b = cond.plates
    s = cond.profile.sigma
    return 1.0 / _quad(lambda r: s(r) ** (-1.0 / (q - 1)), a, b)


def q_harmonic_radial(cond, q):
    """Radial q-harmonic potential with ``u(a) = 0``, ``u(b) = 1``."""
    if not q > 1:
        raise DomainError(f"q must exceed 1, got {q}")
    prof = cond.profile
    a = prof.base[0]
    C = _constant(cond, q)
    e = -1.0 / (q - 1)

    def du(r):
        return C * prof.sigma(r) ** e

    def d2u(r):
        return C * e * prof.sigma(r) ** (e - 1) * prof.dsigma(r)

    @np.vectorize
    def u(r):
        return integrate.quad(du, a, r, **QUAD)[0]

    return LevelSetFunction(prof, u, du, d2u_r=d2u, radial=True, name=f"q-harmonic(q={q:g})")


@dataclass(frozen=True)
class CapacityReport:
    q: float
    value: float
    r: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    laplacian_residual: float
    modulus: float
    relation_residual: float

    def to_dict(self):
        return {"q": self.q, "p": conjugate_exponent(self.q), "capacity": self.value,
                "laplacian_residual": self.laplacian_residual, "modulus": self.modulus,
                "relation_residual": self.relation_residual,
                "potential": {"r": self.r.tolist(), "u": self.u.tolist()}}


def capacity_q(cond, q, n_r=512, n_samples=17):
    """``cap_q = int |u'|^q sigma dr`` for the q-harmonic potential, with diagnostics."""
    u = q_harmonic_radial(cond, q)
    a, b = cond.plates
    prof = cond.profile
    value = _quad(lambda r: np.abs(u.d_r(r)) ** q * prof.sigma(r), a, b)
    p = conjugate_exponent(q)
    params = ModulusParams(p, q)
    r = np.linspace(a, b, n_samples)
    lap = float(np.max(np.abs(q_laplacian(u, params, np.linspace(a, b, 257)))))
    mod = p_modulus(u.foliation(GridChart(prof, n_r)), params).value
    rel = abs(mod - value ** (1 - p)) / mod
    return CapacityReport(q, value, r, np.asarray(u(r)), lap, mod, rel)


def modulus_capacity_check(cond, p, n_r=512):
    """``|mod_p(F_u) - cap_q^(1-p)| / mod_p(F_u)`` for the q-harmonic potential ``u``."""
    return capacity_q(cond, conjugate_exponent(p), n_r).relation_residual


def nu_spread(cond, q, levels=20):
    """Max relative spread of ``nu_q`` of the q-harmonic potential over interior levels."""
    u = q_harmonic_radial(cond, q)
    t = np.linspace(0.0, 1.0, levels + 2)[1:-1]
    nu = np.asarray(nu_q(u, ModulusParams(conjugate_exponent(q), q), t))
    return float(np.ptp(nu) / np.mean(nu))

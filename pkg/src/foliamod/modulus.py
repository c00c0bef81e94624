"""p-modulus of foliations, extremal functions, and the q-Laplacian of level functions.

For a foliation by level sets of a submersion ``Phi`` with Jacobian ``J``::

    f0     = J^(q-1) / (J^(q-1))^
    mod_p  = int (  (J^(q-1))^  )^(1-p) dt

where ``^`` is the leaf integral and ``1/p + 1/q = 1``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, SingularityError
from . import _numerics as nm


def conjugate_exponent(p):
    """``q`` with ``p + q = p q``."""
    if not p > 1:
        raise DomainError(f"exponent must exceed 1, got {p}")
    return p / (p - 1.0)


@dataclass(frozen=True)
class ModulusParams:
    p: float
    q: float = None

    def __post_init__(self):
        q = conjugate_exponent(self.p)
        if self.q is None:
            object.__setattr__(self, "q", q)
        elif abs(self.p + self.q - self.p * self.q) > 1e-14 * self.p * self.q:
            raise DomainError(f"p = {self.p} and q = {self.q} are not conjugate")


def _params(params):
    return params if isinstance(params, ModulusParams) else ModulusParams(float(params))


@dataclass(frozen=True)
class ExtremalFunction:
    """Extremal function sampled on a foliation's grid."""

    values: np.ndarray = field(repr=False)
    params: ModulusParams
    normalization_residual: float
    positivity_margin: float

    def __array__(self, dtype=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class ModulusReport:
    value: float
    params: ModulusParams
    n_r: int
    n_theta: int
    normalization_residual: float
    admissibility_margin: float
    extremal_integral: float
    nu: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "p": self.params.p,
            "q": self.params.q,
            "value": self.value,
            "normalization_residual": self.normalization_residual,
            "admissibility_margin": self.admissibility_margin,
            "grid": {"n_r": self.n_r, "n_theta": self.n_theta},
        }


def admissibility_margin(f, fol, tol=1e-12):
    """``min_L int_L f dmu_L - 1``; ``f`` is admissible iff this is ``>= -tol``."""
    vals = fol.sample(f)
    if vals.min() < -tol:
        raise DomainError(f"admissible candidates are nonnegative; min is {vals.min():.3g}")
    return float(np.min(fol.hat(vals)) - 1.0)


def _leaf_weight(fol, q):
    nu = fol.hat(fol.grad_norm ** (q - 1))
    if not np.all(np.isfinite(nu)) or np.any(nu <= 0):
        raise NumericalError("leaf integral of J^(q-1) vanished or diverged")
    return nu


def extremal_function(fol, params):
    """``f0 = J^(q-1) / (J^(q-1))^`` on the grid of ``fol``."""
    params = _params(params)
    nu = _leaf_weight(fol, params.q)
    f0 = fol.grad_norm ** (params.q - 1) / nu[:, None]
    f0.flags.writeable = False
    resid = float(np.max(np.abs(fol.hat(f0) - 1.0)))
    return ExtremalFunction(f0, params, resid, float(f0.min()))


def p_modulus(fol, params):
    """p-modulus via the submersion formula, cross-checked by ``int f0^p``."""
    params = _params(params)
    nu = _leaf_weight(fol, params.q)
    value = fol.integrate_labels(nu ** (1.0 - params.p))
    ext = extremal_function(fol, params)
    return ModulusReport(
        value=value,
        params=params,
        n_r=fol.t.size,
        n_theta=fol.theta.size,
        normalization_residual=ext.normalization_residual,
        admissibility_margin=admissibility_margin(ext.values, fol),
        extremal_integral=fol.integrate(ext.values ** params.p),
        nu=nu,
    )


def fubini_residuals(fol, params, phi, psi):
    """Residuals of the two co-area type integral identities for ``(phi, psi)``.

    ``res1 = |int f0^(p-1) phi psi^ - int f0^(p-1) phi^ psi|`` and
    ``res2 = |int f0^(p-1) phi - int f0^p phi^|``.
    """
    params = _params(params)
    f0 = extremal_function(fol, params).values
    p = params.p
    a, b = fol.sample(phi), fol.sample(psi)
    a_hat, b_hat = fol.hat_grid(a), fol.hat_grid(b)
    w1 = f0 ** (p - 1)
    res1 = abs(fol.integrate(w1 * a * b_hat) - fol.integrate(w1 * a_hat * b))
    res2 = abs(fol.integrate(w1 * a) - fol.integrate(f0 ** p * a_hat))
    return res1, res2


def nu_q(u, params, t):
    """``nu(t) = int_{u = t} |grad u|^(q-1) dmu`` (vectorised in ``t``)."""
    params = _params(params)
    lo, hi = u.label_range
    t_arr = np.asarray(t, dtype=float)
    if not u.profile.periodic and (np.any(t_arr < lo - 1e-12) or np.any(t_arr > hi + 1e-12)):
        raise DomainError(f"level {t} outside the range [{lo}, {hi}] of {u.name}")
    out = u.nu(t_arr, params.q)
    return float(out) if np.ndim(out) == 0 else out


def levelset_modulus(u, params, n_t=2048):
    """``mod_p(F_u) = int nu(t)^(1-p) dt`` evaluated level by level."""
    params = _params(params)
    lo, hi = u.label_range
    t = np.linspace(lo, hi, n_t, endpoint=not u.profile.periodic)
    dt = (hi - lo) / (n_t if u.profile.periodic else n_t - 1)
    nu = np.asarray(u.nu(t, params.q))
    return float(np.sum(nm.uniform_weights(n_t, dt, u.profile.periodic) * nu ** (1 - params.p)))


def q_laplacian(u, params, r, theta=0.0, h=1e-4):
    """``div(|grad u|^(q-2) grad u)`` at chart points.

    Radial functions use ``sigma^-1 (sigma |u'|^(q-2) u')'`` with ``u''`` in
    closed form when available; otherwise the flux is differenced with
    fourth-order central stencils of step ``h``.
    """
    params = _params(params)
    q = params.q
    profile = u.profile
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float) + 0.0 * r
    grad = u.gradient_norm(r, theta)
    if q < 2 and np.any(grad == 0):
        raise SingularityError("q-Laplacian with q < 2 is singular where grad u vanishes")
    if u.radial:
        du = u.d_r(r)
        d2u = u.d2_r(r)
        s, ds = profile.sigma(r), profile.dsigma(r)
        weight = np.abs(du) ** (q - 2)
        return weight * (ds / s * du + (q - 1) * d2u)

    def flux_r(rr, th):
        u_r, _ = u.partials(rr, th)
        return profile.w(rr) * u.gradient_norm(rr, th) ** (q - 2) * u_r

    def flux_t(rr, th):
        _, u_t = u.partials(rr, th)
        return u.gradient_norm(rr, th) ** (q - 2) * u_t / profile.w(rr)

    dfr, _ = nm.partials(flux_r, r, theta, h)
    _, dft = nm.partials(flux_t, r, theta, h)
    return (dfr + dft) / profile.w(r)


def nu_derivative_sides(u, params, s, h=1e-3):
    """``(central difference of nu at s, (Delta_q u / |grad u|)^ on the level s)``."""
    params = _params(params)
    lhs = (nu_q(u, params, s + h) - nu_q(u, params, s - h)) / (2 * h)
    rhs = u.leaf_integral(
        lambda r, th: q_laplacian(u, params, r, th) / u.gradient_norm(r, th), s)
    return float(lhs), float(rhs)


def nu_derivative_residual(u, params, s, h=1e-3):
    lhs, rhs = nu_derivative_sides(u, params, s, h)
    return abs(lhs - rhs)


def criticality_residual_u(u, params, chart):
    """``Delta_q u - f0 |grad u| (Delta_q u / |grad u|)^`` on the grid of ``F_u``.

    Vanishes exactly when ``F_u`` is a critical point of the p-modulus.
    """
    params = _params(params)
    fol = u.foliation(chart)
    f0 = extremal_function(fol, params).values
    r, th = fol.nodes
    lap = q_laplacian(u, params, r, th)
    grad = u.gradient_norm(r, th)
    return lap - f0 * grad * fol.hat_grid(lap / grad)


def report_json_ready(report):
    """Plain-python dict for any of the frozen report dataclasses."""
    if hasattr(report, "to_dict"):
        return report.to_dict()
    return {k: v for k, v in asdict(report).items() if not isinstance(v, np.ndarray)}

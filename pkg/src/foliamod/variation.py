"""First and second variation of the p-modulus of codimension-one foliations.

Variation fields are normal, ``X = f N``, with ``N`` the unit normal pointing
towards increasing leaf label.  For such fields::

    div_F X = -f h          (leafwise divergence)
    div_Fperp X = N f

and the second variation splits into

    A = int f0^p (-|grad_pq f|^2 + p f^2 |Pi|^2 + q f^2 |nabla_N N|^2 + p f^2 Ric(N))
    B = p int f0^p ((f0 (sqrt(p-1) f h + sqrt(q-1) N f))^)^2

with ``|grad_pq f|^2 = p |grad^T f|^2 + q (N f)^2``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nm
from .errors import DomainError, UnsupportedExponentError
from .foliation import NormalField, flow_normal_field
from .modulus import _params, extremal_function, p_modulus

CRITICAL_TOL = 1e-6
STABILITY_TOL = 1e-8


def _check_normal(f, fol):
    if not isinstance(f, NormalField):
        f = NormalField(f.fn, f.d_r, f.d_theta, name=f.name)
    f.check_support(fol)
    return f


def leafwise_divergences(fol, X):
    """``(div_F X, div_Fperp X)`` for ``X = f N`` on the grid of ``fol``."""
    f, nf, _ = fol.field_derivatives(X)
    return -f * fol.mean_curvature, nf


def critical_residual(fol, params):
    """``N(log f0^p) - p h`` on the grid; zero iff ``fol`` is a critical point."""
    params = _params(params)
    f0 = extremal_function(fol, params).values
    return params.p * fol.normal_derivative(np.log(f0)) - params.p * fol.mean_curvature


def first_variation(fol, params, X):
    """``-p int f0^(p-1) (X f0 + f0 div_F X)`` for ``X = f N``."""
    params = _params(params)
    p = params.p
    f0 = extremal_function(fol, params).values
    f, _, _ = fol.field_derivatives(X)
    x_f0 = f * fol.normal_derivative(f0)
    div_f = -f * fol.mean_curvature
    return -p * fol.integrate(f0 ** (p - 1) * (x_f0 + f0 * div_f))


@dataclass(frozen=True)
class SecondVariationReport:
    A: float
    B: float
    total: float
    p: float
    q: float
    field: str
    scale: float
    critical_residual: float
    critical: bool
    fd_value: float = None
    fd_discrepancy: float = None

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "field", "p", "q", "A", "B", "total", "scale", "critical_residual", "critical",
            "fd_value", "fd_discrepancy")}


def second_variation_parts(fol, params, f):
    """``(A, B, scale)`` for ``X = f N``; ``scale = int f0^p (f^2 + |grad f|^2)``."""
    params = _params(params)
    p, q = params.p, params.q
    f0 = extremal_function(fol, params).values
    fv, nf, tf2 = fol.field_derivatives(f)
    w = f0 ** p
    grad_pq = p * tf2 + q * nf ** 2
    curv = (p * fol.second_fundamental_sq + q * fol.normal_curvature ** 2
            + p * fol.ricci_normal)
    A = fol.integrate(w * (-grad_pq + fv ** 2 * curv))
    inner = f0 * (np.sqrt(p - 1) * fv * fol.mean_curvature + np.sqrt(q - 1) * nf)
    B = p * fol.integrate(w * fol.hat_grid(inner) ** 2)
    scale = fol.integrate(w * (fv ** 2 + nf ** 2 + tf2))
    return A, B, scale


def modulus_along_flow(fol, params, f, ts, steps=8):
    """``mod_p`` of the flowed foliations ``phi_t(F)`` for each ``t`` in ``ts``."""
    return np.array([p_modulus(flow_normal_field(fol, f, t, steps) if t else fol,
                               params).value for t in ts])


def fd_second_derivative(fol, params, f, step=1e-2, steps=8):
    """Five-point fourth-order estimate of ``d^2/dt^2 mod_p(phi_t F)`` at 0."""
    m = modulus_along_flow(fol, params, f, [-2 * step, -step, 0.0, step, 2 * step], steps)
    return float((-m[0] + 16 * m[1] - 30 * m[2] + 16 * m[3] - m[4]) / (12 * step ** 2))


def fd_first_derivative(fol, params, f, step=1e-2, steps=8):
    m = modulus_along_flow(fol, params, f, [-2 * step, -step, step, 2 * step], steps)
    return float((m[0] - 8 * m[1] + 8 * m[2] - m[3]) / (12 * step))


def second_variation(fol, params, f, fd_step=None, flow_steps=8, critical_tol=CRITICAL_TOL):
    """Second variation of ``mod_p`` along ``X = f N`` (requires ``p >= 2``).

    The report is produced for non-critical foliations too, with
    ``critical=False``.  Passing ``fd_step`` adds a finite-difference estimate
    along the actual flow of ``X``.
    """
    params = _params(params)
    if params.p < 2:
        raise UnsupportedExponentError(f"second variation needs p >= 2, got p = {params.p}")
    f = _check_normal(f, fol)
    A, B, scale = second_variation_parts(fol, params, f)
    crit = float(np.max(np.abs(critical_residual(fol, params))))
    fd_value = fd_disc = None
    if fd_step is not None:
        fd_value = fd_second_derivative(fol, params, f, fd_step, flow_steps)
        fd_disc = abs(fd_value - (A + B))
    return SecondVariationReport(A, B, A + B, params.p, params.q, f.name, scale, crit,
                                 crit < critical_tol, fd_value, fd_disc)


@dataclass(frozen=True)
class StabilityReport:
    max_total: float
    records: list = field(repr=False)
    verdict: str
    witness: str = None
    tolerance: float = STABILITY_TOL
    critical: bool = True

    def to_dict(self):
        return {"verdict": self.verdict, "max_total": self.max_total, "witness": self.witness,
                "tolerance": self.tolerance, "critical": self.critical,
                "fields": [r.to_dict() for r in self.records]}


def summarize_scan(records, tol=STABILITY_TOL):
    """Aggregate second-variation reports into a stability verdict."""
    if not records:
        raise ValueError("stability scan needs at least one test field")
    violated = [rec for rec in records if rec.total > tol * rec.scale]
    critical = all(rec.critical for rec in records)
    if violated:
        verdict, witness = "violated", max(violated, key=lambda rec: rec.total).field
    else:
        verdict, witness = "stable-at-sampled-resolution", None
    return StabilityReport(max(rec.total for rec in records), list(records), verdict, witness,
                           tol, critical)


def stability_scan(fol, params, family, tol=STABILITY_TOL, fd_step=None):
    """Second variation over a sampled family; stable iff every total <= tol * scale."""
    return summarize_scan([second_variation(fol, params, f, fd_step=fd_step) for f in family],
                          tol)


def hardy_terms(fol, params, f):
    """``(int f^2 rho_p f0^p, int |grad_pq f|^2 f0^p)``: the two sides of the inequality."""
    params = _params(params)
    p, q = params.p, params.q
    f0 = extremal_function(fol, params).values
    fv, nf, tf2 = fol.field_derivatives(f)
    rho_p = (p * fol.second_fundamental_sq + p * fol.ricci_normal
             + q * fol.normal_curvature ** 2)
    w = f0 ** p
    return fol.integrate(fv ** 2 * rho_p * w), fol.integrate((p * tf2 + q * nf ** 2) * w)


def hardy_residual(fol, params, f):
    """``int |grad_pq f|^2 f0^p - int f^2 rho_p f0^p``; nonnegative on p-stable foliations."""
    f = _check_normal(f, fol)
    lhs, rhs = hardy_terms(fol, params, f)
    return rhs - lhs


def alpha0(fol, params):
    """``(f0^2)^ / f0``."""
    f0 = extremal_function(fol, params).values
    return fol.hat_grid(f0 ** 2) / f0


def alpha0_sufficient_check(fol, params, f):
    """Left side of the alpha0-based sufficient condition for p-stability (<= 0 suffices)."""
    params = _params(params)
    p, q = params.p, params.q
    f = _check_normal(f, fol)
    f0 = extremal_function(fol, params).values
    a0 = fol.hat_grid(f0 ** 2) / f0
    d_a0 = fol.normal_derivative(a0)
    fv, nf, tf2 = fol.field_derivatives(f)
    h = fol.mean_curvature
    f2 = fv ** 2
    integrand = (-p * tf2
                 - q * (1 - a0) * nf ** 2
                 + p * f2 * (1 - a0) * fol.ricci_normal
                 + p * f2 * (1 - a0) * fol.second_fundamental_sq
                 + q * f2 * fol.normal_curvature ** 2
                 - p * d_a0 * f2 * h
                 + p * a0 * f2 * fol.div_normal_curvature)
    return fol.integrate(f0 ** p * integrand)


def sigma2f0_residual(fol, params, squared_gradient=False):
    """Max-norm residual of the curvature identity for ``k0 = log f0^p``.

    ``squared_gradient`` selects ``|grad^T k0|^2`` instead of ``|grad^T k0|`` in
    the ``(2 - p)`` term; both agree on foliations with leafwise-constant f0.
    """
    params = _params(params)
    p, q = params.p, params.q
    crit = float(np.max(np.abs(critical_residual(fol, params))))
    if crit > CRITICAL_TOL:
        warnings.warn(f"foliation is not critical (residual {crit:.3g}); the identity "
                      "need not hold", RuntimeWarning, stacklevel=2)
    k0 = p * np.log(extremal_function(fol, params).values)
    lhs = (p * fol.second_fundamental_sq + q * fol.normal_curvature ** 2
           + p * fol.ricci_normal)
    grad_t = np.abs(fol.leaf_derivative(k0))
    grad_term = grad_t ** 2 if squared_gradient else grad_t
    rhs = ((p - 1) * fol.leaf_laplacian(k0) + (2 - p) * grad_term
           + fol.normal_derivative2(k0))
    return float(np.max(np.abs(lhs - rhs)))


# -- Jacobian derivatives ------------------------------------------------------------------

@dataclass(frozen=True)
class JacobianDerivatives:
    """First and second t-derivatives at t = 0 of the leaf and full Jacobians of a flow."""

    d_leaf: np.ndarray
    d2_leaf: np.ndarray
    d_full: np.ndarray
    d2_full: np.ndarray


def _covariant_gradient(X, profile, r, th):
    """Mixed components ``(nabla X)^a_b`` in the chart, plus ``X`` itself."""
    xr, xt = X(r, th)
    xr_r, xr_t = X.x_r.partials(r, th)
    xt_r, xt_t = X.x_theta.partials(r, th)
    w, dw = profile.w(r), profile.dw(r)
    a_rr = xr_r
    a_rt = xr_t - w * dw * xt          # Gamma^r_{theta theta} = -w w'
    a_tr = xt_r + dw / w * xt          # Gamma^theta_{r theta} = w'/w
    a_tt = xt_t + dw / w * xr
    return xr, xt, a_rr, a_rt, a_tr, a_tt


def jacobian_derivatives(X, chart, h=1e-3):
    """Closed-form Jacobian derivatives for the leaves ``{r = const}`` (surface mode).

    Second derivatives of ``X`` enter through ``div(nabla_X X)`` and are
    evaluated by fourth-order differences of step ``h`` of ``nabla_X X``.
    """
    if chart.mode != "surface":
        raise DomainError("Jacobian derivatives are evaluated on a surface chart")
    profile = chart.profile
    r, th = chart.mesh()

    def accel(rr, tt):
        xr, xt, a_rr, a_rt, a_tr, a_tt = _covariant_gradient(X, profile, rr, tt)
        return xr * a_rr + xt * a_rt, xr * a_tr + xt * a_tt

    xr, xt, a_rr, a_rt, a_tr, a_tt = _covariant_gradient(X, profile, r, th)
    w = profile.w(r)
    dw = profile.dw(r)
    K = profile.curvature(r)
    y_r, y_t = accel(r, th)
    wy_r, _ = nm.partials(lambda rr, tt: profile.w(rr) * accel(rr, tt)[0], r, th, h)
    _, yt_t = nm.partials(lambda rr, tt: accel(rr, tt)[1], r, th, h)
    div_y = wy_r / w + yt_t
    div_f_y = yt_t + dw / w * y_r

    div_x = a_rr + a_tt
    tr_sq = a_rr ** 2 + 2 * a_rt * a_tr + a_tt ** 2
    ric = K * (xr ** 2 + w ** 2 * xt ** 2)
    d2_full = div_x ** 2 - ric + div_y - tr_sq

    div_f_x = a_tt
    grad_e_sq = (a_rt ** 2 + w ** 2 * a_tt ** 2) / w ** 2
    ric_f = K * xr ** 2
    # single leaf direction: both double sums collapse to (div_F X)^2
    d2_leaf = div_f_x ** 2 - ric_f + div_f_y + grad_e_sq - 2 * div_f_x ** 2
    return JacobianDerivatives(div_f_x, d2_leaf, div_x, d2_full)


@dataclass(frozen=True)
class FlowCheck:
    analytic: JacobianDerivatives
    numeric: JacobianDerivatives
    discrepancy: float
    r: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)

    def rows(self):
        """``(node, analytic d2J0, FD d2J0, analytic d2J, FD d2J)`` per chart node."""
        a, n = self.analytic, self.numeric
        return [(i, a.d2_leaf.flat[i], n.d2_leaf.flat[i], a.d2_full.flat[i], n.d2_full.flat[i])
                for i in range(a.d2_leaf.size)]


def _flowed_jacobians(X, profile, r0, th0, t, steps):
    def rhs(y):
        r, th = y[0], y[1]
        xr, xt = X(r, th)
        xr_r, xr_t = X.x_r.partials(r, th)
        xt_r, xt_t = X.x_theta.partials(r, th)
        d = y[2:].reshape((2, 2) + r.shape)
        dx = np.array([[xr_r, xr_t], [xt_r, xt_t]])
        dd = np.einsum("ab...,bc...->ac...", dx, d)
        return np.concatenate([np.stack([xr, xt]), dd.reshape((4,) + r.shape)])

    eye = np.zeros((4,) + r0.shape)
    eye[0] = eye[3] = 1.0
    y = nm.rk4(rhs, np.concatenate([np.stack([r0, th0]), eye]), t, steps)
    r1 = y[0]
    d00, d01, d10, d11 = y[2], y[3], y[4], y[5]
    w0, w1 = profile.w(r0), profile.w(r1)
    full = (d00 * d11 - d01 * d10) * w1 / w0
    v_r, v_t = d01 / w0, d11 / w0
    leaf = np.sqrt(v_r ** 2 + w1 ** 2 * v_t ** 2)
    return leaf, full


def jacobian_flow_check(X, chart, h=1e-3, steps=4):
    """Compare ``jacobian_derivatives`` with differences of numerically flowed Jacobians.

    The discrepancy is ``max |FD - analytic| / max(1, max |analytic|)`` over the
    four quantities.
    """
    analytic = jacobian_derivatives(X, chart)
    r, th = chart.mesh()
    lp, fp = _flowed_jacobians(X, chart.profile, r, th, h, steps)
    lm, fm = _flowed_jacobians(X, chart.profile, r, th, -h, steps)
    numeric = JacobianDerivatives((lp - lm) / (2 * h), (lp - 2.0 + lm) / h ** 2,
                                  (fp - fm) / (2 * h), (fp - 2.0 + fm) / h ** 2)
    disc = 0.0
    for name in ("d_leaf", "d2_leaf", "d_full", "d2_full"):
        a, n = getattr(analytic, name), getattr(numeric, name)
        disc = max(disc, float(np.max(np.abs(a - n)) / max(1.0, np.max(np.abs(a)))))
    return FlowCheck(analytic, numeric, disc, r, th)

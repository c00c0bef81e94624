"""Codimension-one foliations of warped products, leaf integrals and normal flows.

Every foliation is stored in adapted coordinates ``(t, theta)``: the leaf with
label ``t`` is the graph ``r = rho(t, theta)`` over the fiber circle (surface
mode) or the slice ``r = rho(t)`` (radial mode, any fiber dimension).  In
these coordinates

* the leaf measure is ``sqrt(rho_theta^2 + w(rho)^2) dtheta`` (surface) or
  ``sigma(rho)`` (radial),
* the Riemannian volume is ``w(rho) rho_t dt dtheta`` (surface) or
  ``sigma(rho) rho_t dt`` (radial),
* the submersion ``(r, theta) -> t`` has gradient norm
  ``sqrt(1 + rho_theta^2 / w^2) / rho_t``,

so leaf integrals never need interpolation: they are sums over the theta
axis of the label grid.
"""

import csv
from functools import cached_property

import numpy as np
from scipy import interpolate

from . import _numerics as nm
from .errors import DomainError, FlowDegeneracyError, NumericalError
from .geometry import GridChart

EPS_MONO = 1e-8
SUPPORT_TOL = 1e-12


class ScalarField:
    """Smooth scalar function ``f(r, theta)`` on the chart, vectorised in numpy.

    Partial derivatives are taken from ``d_r``/``d_theta`` when supplied and from
    fourth-order central differences of ``fn`` otherwise.
    """

    def __init__(self, fn, d_r=None, d_theta=None, name=None, fd_step=1e-3):
        self.fn = fn
        self.d_r = d_r
        self.d_theta = d_theta
        self.name = name or getattr(fn, "__name__", "field")
        self.fd_step = fd_step

    def __call__(self, r, theta=0.0):
        r = np.asarray(r, dtype=float)
        return np.asarray(self.fn(r, np.asarray(theta, dtype=float)), dtype=float) * np.ones_like(
            r + np.asarray(theta, dtype=float))

    def partials(self, r, theta=0.0):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) + 0.0 * r
        if self.d_r is not None and self.d_theta is not None:
            ones = np.ones_like(r + theta)
            return (np.asarray(self.d_r(r, theta)) * ones,
                    np.asarray(self.d_theta(r, theta)) * ones)
        fd_r, fd_t = nm.partials(self, r, theta, self.fd_step)
        if self.d_r is not None:
            fd_r = np.asarray(self.d_r(r, theta)) * np.ones_like(r)
        if self.d_theta is not None:
            fd_t = np.asarray(self.d_theta(r, theta)) * np.ones_like(r)
        return fd_r, fd_t

    def evaluate(self, r, theta=0.0):
        """``(f, f_r, f_theta)`` in one call."""
        return (self(r, theta),) + tuple(self.partials(r, theta))

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


class NormalField(ScalarField):
    """Coefficient ``f`` of a variation field ``X = f N``."""

    def check_support(self, fol):
        """Raise unless ``|f| < 1e-12`` on both boundary leaves of an interval base."""
        if fol.periodic:
            return
        for i in (0, -1):
            vals = self(fol.rho[i], fol.theta)
            if np.max(np.abs(vals)) >= SUPPORT_TOL:
                raise DomainError(
                    f"field {self.name!r} is not compactly supported: |f| = "
                    f"{np.max(np.abs(vals)):.3g} on the boundary leaf t = {fol.t[i]:.6g}")


class GeneralField:
    """Vector field with chart components ``X = X_r d/dr + X_theta d/dtheta``."""

    def __init__(self, x_r, x_theta, name=None):
        self.x_r = x_r if isinstance(x_r, ScalarField) else ScalarField(x_r)
        self.x_theta = x_theta if isinstance(x_theta, ScalarField) else ScalarField(x_theta)
        self.name = name or "X"

    def __call__(self, r, theta):
        return self.x_r(r, theta), self.x_theta(r, theta)

    def __repr__(self):
        return f"GeneralField({self.name!r})"


class _RadialBasis:
    """Basis functions of the normalised coordinate ``s`` in [0, 1] (and derivatives)."""

    def __init__(self, coefficients, periodic, compact):
        self.periodic = periodic
        if periodic:
            self.coef = np.asarray(coefficients, dtype=float)
        else:
            poly = np.polynomial.Polynomial(coefficients)
            if compact:
                # (s(1-s))^3 vanishes to third order at both boundary leaves
                poly = poly * np.polynomial.Polynomial([0, 1, -1]) ** 3 * 64.0
            self.poly, self.dpoly = poly, poly.deriv()

    @property
    def harmonics(self):
        return (len(self.coef) - 1) // 2 if self.periodic else 0

    def __call__(self, s, table=None):
        if not self.periodic:
            return self.poly(s), self.dpoly(s)
        table = table or harmonic_table(s, self.harmonics)
        val, der = 0.0 * s + self.coef[0], 0.0 * s
        for j in range(1, self.harmonics + 1):
            a, b = self.coef[2 * j - 1], self.coef[2 * j]
            c, sn = table[j - 1]
            val = val + a * c + b * sn
            der = der + 2 * np.pi * j * (-a * sn + b * c)
        return val, der


def harmonic_table(s, count):
    """``[(cos 2 pi j s, sin 2 pi j s) for j = 1..count]``."""
    return [(np.cos(2 * np.pi * j * s), np.sin(2 * np.pi * j * s)) for j in range(1, count + 1)]


class TrigPolyField(NormalField):
    """``sum_k R_k(r) (cos-or-sin)(k theta)`` with analytic partials.

    On an interval base each ``R_k`` is a polynomial in the normalised radius
    times the bump ``64 (s(1-s))^3``; on a circle base it is a trigonometric
    polynomial in ``r``.
    """

    def __init__(self, profile, radial_coefficients, modes, name=None):
        self.a, self.b = profile.base
        self.modes = [(int(k), kind) for k, kind in modes]
        self.bases = radial_coefficients
        super().__init__(self._value, self._d_r, self._d_theta, name=name or "trigpoly")

    def _angular(self, theta):
        # flows keep theta fixed, so the last angular table is reused
        theta = np.asarray(theta, dtype=float)
        cached = getattr(self, "_cache", None)
        if cached is not None and cached[0].shape == theta.shape and np.array_equal(
                cached[0], theta):
            return cached[1]
        table = []
        for k, kind in self.modes:
            c, s = np.cos(k * theta), np.sin(k * theta)
            table.append((c, -k * s) if kind == "cos" else (s, k * c))
        self._cache = (theta.copy(), table)
        return table

    def _terms(self, r, theta):
        s = (np.asarray(r, dtype=float) - self.a) / (self.b - self.a)
        top = max(getattr(b, "harmonics", 0) for b in self.bases)
        table = harmonic_table(s, top) if top else None
        for basis, (ang, dang) in zip(self.bases, self._angular(theta)):
            rad, drad = basis(s, table) if table else basis(s)
            yield rad, drad / (self.b - self.a), ang, dang

    def _value(self, r, theta):
        return sum(rad * ang for rad, _, ang, _ in self._terms(r, theta))

    def _d_r(self, r, theta):
        return sum(drad * ang for _, drad, ang, _ in self._terms(r, theta))

    def _d_theta(self, r, theta):
        return sum(rad * dang for rad, _, _, dang in self._terms(r, theta))

    def evaluate(self, r, theta=0.0):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) + 0.0 * r
        f = f_r = f_th = 0.0 * theta
        for rad, drad, ang, dang in self._terms(r, theta):
            f, f_r, f_th = f + rad * ang, f_r + drad * ang, f_th + rad * dang
        return f, f_r, f_th


def random_fields(profile, count, seed=0, fourier=3, degree=2, radial_only=False,
                  compact=True):
    """Reproducible family of smooth test fields (truncated Fourier x polynomial).

    With ``compact=True`` (and an interval base) every field vanishes to third
    order on both boundary leaves.
    """
    rng = np.random.default_rng(seed)
    out = []
    modes = [(0, "cos")]
    if not radial_only:
        for k in range(1, fourier + 1):
            modes += [(k, "cos"), (k, "sin")]
    for i in range(count):
        bases = []
        for _ in modes:
            if profile.periodic:
                coef = rng.standard_normal(2 * degree + 1) / (1 + np.arange(2 * degree + 1))
            else:
                coef = rng.standard_normal(degree + 1)
            bases.append(_RadialBasis(coef, profile.periodic, compact))
        amp = rng.standard_normal(len(modes)) / (1 + np.array([k for k, _ in modes]))
        bases = [_ScaledBasis(bs, a) for bs, a in zip(bases, amp)]
        out.append(TrigPolyField(profile, bases, modes, name=f"seed{seed}-{i}"))
    return out


class _ScaledBasis:
    def __init__(self, basis, scale):
        self.basis, self.scale = basis, scale

    @property
    def harmonics(self):
        return getattr(self.basis, "harmonics", 0)

    def __call__(self, s, table=None):
        v, d = self.basis(s, table) if table else self.basis(s)
        return self.scale * v, self.scale * d


def random_general_fields(profile, count, seed=0, fourier=2, degree=2):
    """Smooth (not compactly supported) vector fields for the Jacobian checks."""
    rng = np.random.default_rng(seed)
    comps = random_fields(profile, 2 * count, seed=int(rng.integers(2**31)), fourier=fourier,
                          degree=degree, compact=False)
    return [GeneralField(comps[2 * i], comps[2 * i + 1], name=f"seed{seed}-{i}")
            for i in range(count)]


class GraphFoliation:
    """Foliation by graphs ``r = rho(t, theta)`` sampled on a label grid.

    Arrays have shape ``(n_t, n_theta)`` with ``n_theta == 1`` in radial mode.
    Instances are immutable; derived arrays are computed lazily and cached.
    """

    def __init__(self, profile, mode, t, rho, rho_t, rho_theta=None, rho_thth=None,
                 n_theta=1, leaf_fn=None, name="foliation"):
        self.profile = profile
        self.mode = mode
        self.t = np.asarray(t, dtype=float)
        self.periodic = profile.periodic
        self.theta = GridChart(profile, 8, n_theta, mode).theta
        shape = (self.t.size, self.theta.size)
        self.rho = self._freeze(rho, shape)
        self.rho_t = self._freeze(rho_t, shape)
        zero = np.zeros(shape)
        self.rho_theta = self._freeze(zero if rho_theta is None else rho_theta, shape)
        self.rho_thth = self._freeze(zero if rho_thth is None else rho_thth, shape)
        self.leaf_fn = leaf_fn
        self.name = name
        bad = np.argwhere(~(self.rho_t >= EPS_MONO))
        if bad.size:
            i = bad[0][0]
            raise FlowDegeneracyError(
                f"leaves are not graphs: d rho/dt = {self.rho_t[tuple(bad[0])]:.3g} "
                f"at leaf t = {self.t[i]:.6g}", leaf_label=float(self.t[i]))
        if not np.all(profile.contains(self.rho, tol=1e-9)):
            raise DomainError("leaves leave the base")

    @staticmethod
    def _freeze(values, shape):
        arr = np.array(np.broadcast_to(np.asarray(values, dtype=float), shape))
        arr.flags.writeable = False
        return arr

    def __repr__(self):
        return (f"GraphFoliation({self.name!r}, mode={self.mode!r}, "
                f"n_t={self.t.size}, n_theta={self.theta.size})")

    # -- grid bookkeeping -----------------------------------------------------------

    @property
    def shape(self):
        return self.rho.shape

    @property
    def dt(self):
        if self.periodic:
            return self.profile.length / self.t.size
        return (self.t[-1] - self.t[0]) / (self.t.size - 1)

    @property
    def dtheta(self):
        return 2 * np.pi / self.theta.size

    @property
    def label_range(self):
        if self.periodic:
            return self.t[0], self.t[0] + self.profile.length
        return self.t[0], self.t[-1]

    @cached_property
    def t_weights(self):
        return nm.uniform_weights(self.t.size, self.dt, self.periodic)

    @property
    def nodes(self):
        """Chart coordinates ``(r, theta)`` of every grid node."""
        return self.rho, np.broadcast_to(self.theta, self.shape)

    def sample(self, fld):
        if callable(fld):
            r, th = self.nodes
            return np.asarray(fld(r, th), dtype=float) * np.ones(self.shape)
        arr = np.asarray(fld, dtype=float)
        if arr.shape == (self.t.size,):
            arr = arr[:, None]
        if arr.ndim == 2 and arr.shape[0] == self.t.size and arr.shape[1] == 1:
            arr = np.broadcast_to(arr, self.shape)
        if arr.shape != self.shape:
            raise ValueError(f"field shape {arr.shape} does not match foliation {self.shape}")
        return arr

    # -- metric data ----------------------------------------------------------------

    @cached_property
    def w(self):
        return np.asarray(self.profile.w(self.rho), dtype=float) * np.ones(self.shape)

    @cached_property
    def dw(self):
        return np.asarray(self.profile.dw(self.rho), dtype=float) * np.ones(self.shape)

    @cached_property
    def d2w(self):
        return np.asarray(self.profile.d2w(self.rho), dtype=float) * np.ones(self.shape)

    @cached_property
    def leaf_metric(self):
        """``g_theta_theta`` along the leaf (surface mode)."""
        return self.rho_theta ** 2 + self.w ** 2

    @cached_property
    def grad_norm(self):
        """``|grad t|``, the Jacobian of the defining submersion."""
        return np.sqrt(1.0 + self.rho_theta ** 2 / self.w ** 2) / self.rho_t

    @cached_property
    def leaf_weights(self):
        if self.mode == "radial":
            return self.profile.sigma(self.rho)
        return np.sqrt(self.leaf_metric) * self.dtheta

    @cached_property
    def volume_weights(self):
        return self.t_weights[:, None] * self.leaf_weights / self.grad_norm

    # -- integrals ------------------------------------------------------------------

    def hat(self, fld):
        """Leaf integrals of ``fld`` for every label (shape ``(n_t,)``)."""
        return np.sum(self.sample(fld) * self.leaf_weights, axis=1)

    def hat_grid(self, fld):
        """Leaf integrals broadcast back onto the grid (constant on leaves)."""
        return np.broadcast_to(self.hat(fld)[:, None], self.shape)

    def integrate(self, fld):
        return float(np.sum(self.volume_weights * self.sample(fld)))

    def integrate_labels(self, values):
        """``int values(t) dt`` over the label range."""
        return float(np.sum(self.t_weights * np.asarray(values, dtype=float)))

    # -- derivatives of grid arrays -------------------------------------------------

    def d_dt(self, values):
        return nm.diff(self.sample(values), self.dt, axis=0, periodic=self.periodic)

    def d_dtheta(self, values):
        values = self.sample(values)
        if self.mode == "radial":
            return np.zeros(self.shape)
        return nm.diff(values, self.dtheta, axis=1, periodic=True)

    def normal_derivative(self, values):
        """``N F`` for a grid array, ``N`` the unit normal towards increasing t."""
        values = self.sample(values)
        g = self.grad_norm
        out = g * self.d_dt(values)
        if self.mode == "surface":
            out = out - self.rho_theta * self.d_dtheta(values) / (self.rho_t * self.w ** 2 * g)
        return out

    def normal_derivative2(self, values):
        """``N(N F)``; the pure ``t`` part uses a second-derivative stencil."""
        values = self.sample(values)
        g = self.grad_norm
        f_t = self.d_dt(values)
        out = g ** 2 * nm.diff2(values, self.dt, axis=0, periodic=self.periodic)
        out = out + g * self.d_dt(g) * f_t
        if self.mode == "surface":
            c = self.rho_theta / (self.rho_t * self.w ** 2 * g)
            nf = g * f_t - c * self.d_dtheta(values)
            out = out - g * self.d_dt(c * self.d_dtheta(values)) - c * self.d_dtheta(nf)
        return out

    def leaf_derivative(self, values):
        """Arc-length derivative along the leaves (zero in radial mode)."""
        if self.mode == "radial":
            return np.zeros(self.shape)
        return self.d_dtheta(values) / np.sqrt(self.leaf_metric)

    def leaf_laplacian(self, values):
        if self.mode == "radial":
            return np.zeros(self.shape)
        root = np.sqrt(self.leaf_metric)
        return self.d_dtheta(self.d_dtheta(values) / root) / root

    # -- derivatives of analytic fields ---------------------------------------------

    def field_derivatives(self, fld):
        """``(f, N f, |grad^T f|^2)`` at the nodes for a field with partials."""
        r, th = self.nodes
        f = fld(r, th) * np.ones(self.shape)
        f_r, f_th = fld.partials(r, th)
        if self.mode == "radial":
            return f, f_r * np.ones(self.shape), np.zeros(self.shape)
        a, w = self.rho_theta, self.w
        nf = (f_r - f_th * a / w ** 2) / np.sqrt(1.0 + a ** 2 / w ** 2)
        tf = (f_th + f_r * a) / np.sqrt(self.leaf_metric)
        return f, nf, tf ** 2

    # -- curvature of the leaves ----------------------------------------------------

    @cached_property
    def mean_curvature(self):
        """Scalar ``h`` with ``H = h N``."""
        k = self.profile.fiber_dim
        if self.mode == "radial":
            return -k * self.dw / self.w
        a, w, dw = self.rho_theta, self.w, self.dw
        num = self.rho_thth - w * dw - 2.0 * dw * a ** 2 / w
        return num / (self.leaf_metric * np.sqrt(1.0 + a ** 2 / w ** 2))

    @cached_property
    def second_fundamental_sq(self):
        if self.mode == "radial":
            k = self.profile.fiber_dim
            return k * (self.dw / self.w) ** 2
        return self.mean_curvature ** 2

    @cached_property
    def ricci_normal(self):
        return -self.profile.fiber_dim * self.d2w / self.w

    @cached_property
    def normal_curvature(self):
        """Leaf-tangent component of ``nabla_N N`` (the orthogonal mean curvature)."""
        return self.leaf_derivative(np.log(self.grad_norm))

    @cached_property
    def div_normal_curvature(self):
        if self.mode == "radial":
            return np.zeros(self.shape)
        vol = self.rho_t * self.w
        flux = vol * self.normal_curvature / np.sqrt(self.leaf_metric)
        return self.d_dtheta(flux) / vol

    # -- single leaves --------------------------------------------------------------

    def leaf(self, t):
        """``(rho, rho_theta)`` of the leaf with label ``t`` on the theta nodes."""
        lo, hi = self.label_range
        if not self.periodic and not (lo - 1e-12 <= t <= hi + 1e-12):
            raise DomainError(f"leaf label {t} outside [{lo}, {hi}]")
        if self.leaf_fn is not None:
            rho, rho_th = self.leaf_fn(t, self.theta)
            return (np.asarray(rho, dtype=float) * np.ones(self.theta.shape),
                    np.asarray(rho_th, dtype=float) * np.ones(self.theta.shape))
        idx = np.flatnonzero(np.isclose(self.t, t, rtol=0, atol=1e-12 * max(1, abs(t))))
        if idx.size == 0:
            raise DomainError(f"label {t} is not a grid label of this sampled foliation")
        return self.rho[idx[0]], self.rho_theta[idx[0]]

    def label_of(self, r, theta=0.0):
        """Label of the leaf through the chart point ``(r, theta)``."""
        if self.leaf_fn is None:
            raise DomainError("point lookup requires an analytic leaf map")
        lo, hi = self.label_range
        pad = (hi - lo) if self.periodic else 0.0
        return float(nm.invert_increasing(
            lambda t: self.leaf_fn(t, np.asarray(theta, dtype=float))[0], r, lo - pad, hi + pad))

    def hat_leaf(self, fld, t):
        rho, rho_th = self.leaf(t)
        if self.mode == "radial":
            return float(self.profile.sigma(rho[0]) * fld(rho[0], 0.0))
        weights = np.sqrt(rho_th ** 2 + self.profile.w(rho) ** 2) * self.dtheta
        return float(np.sum(fld(rho, self.theta) * weights))


def radial_foliation(chart):
    """Foliation by the level sets ``{r = t}`` of the distance function."""
    r, _ = chart.mesh()
    return GraphFoliation(chart.profile, chart.mode, chart.r, r, 1.0, 0.0, 0.0,
                          n_theta=chart.n_theta, name="distance",
                          leaf_fn=lambda t, th: (t + 0.0 * th, 0.0 * th))


def graph_foliation(chart, rho, rho_t, rho_theta=None, rho_thth=None, t_range=None,
                    name="graph"):
    """Foliation with analytic leaf map ``rho(t, theta)`` and its partials."""
    profile = chart.profile
    lo, hi = t_range if t_range is not None else profile.base
    t = np.linspace(lo, hi, chart.n_r, endpoint=not profile.periodic)
    T, TH = np.meshgrid(t, chart.theta, indexing="ij")
    zero = lambda tt, th: 0.0 * (tt + th)  # noqa: E731
    rho_theta = rho_theta or zero
    rho_thth = rho_thth or zero
    return GraphFoliation(profile, chart.mode, t, rho(T, TH), rho_t(T, TH), rho_theta(T, TH),
                          rho_thth(T, TH), n_theta=chart.n_theta, name=name,
                          leaf_fn=lambda tt, th: (rho(tt, th), rho_theta(tt, th)))


def shear_foliation(chart, eps, shape=np.sin, dshape=np.cos, d2shape=None):
    """Leaves ``r = t + eps * s(theta)``; the default ``s = sin`` is the torus shear."""
    d2shape = d2shape or (lambda th: -np.sin(th))
    return graph_foliation(
        chart,
        lambda t, th: t + eps * shape(th),
        lambda t, th: 1.0 + 0.0 * (t + th),
        lambda t, th: eps * dshape(th) + 0.0 * t,
        lambda t, th: eps * d2shape(th) + 0.0 * t,
        name=f"shear(eps={eps})")


def hat(fld, fol, t=None, point=None):
    """Leaf integral of ``fld``: every leaf, one label ``t``, or the leaf through ``point``."""
    if point is not None:
        t = fol.label_of(*point)
    if t is None:
        return fol.hat(fld)
    if not callable(fld):
        raise ValueError("single-leaf evaluation needs a callable field")
    return fol.hat_leaf(fld, t)


def gradient_norm(obj, chart=None):
    """``|grad Phi|`` on a foliation's grid, or ``|grad u|`` on a chart for level functions."""
    if isinstance(obj, GraphFoliation):
        return obj.grad_norm
    if chart is None:
        raise ValueError("a chart is required to sample a level-set function")
    r, th = chart.mesh()
    return obj.gradient_norm(r, th)


class LevelSetFunction:
    """Function ``u(r, theta)`` with ``du/dr > 0`` whose level sets foliate the chart.

    ``radial=True`` marks functions of ``r`` alone (usable in both chart modes);
    ``d2u_r`` is then the optional closed-form ``u''``.
    """

    def __init__(self, profile, u, du_r=None, du_theta=None, d2u_r=None, radial=False,
                 n_theta=256, name="u"):
        self.profile = profile
        self.radial = radial
        self.n_theta = n_theta
        self.name = name
        if radial:
            self.field = ScalarField(lambda r, th: u(r), du_r and (lambda r, th: du_r(r)),
                                     lambda r, th: 0.0 * r, name=name)
            self._d2 = d2u_r
        else:
            self.field = ScalarField(u, du_r, du_theta, name=name)
            self._d2 = None
        self._u = u

    def __repr__(self):
        return f"LevelSetFunction({self.name!r}, radial={self.radial})"

    def __call__(self, r, theta=0.0):
        return self.field(r, theta)

    def partials(self, r, theta=0.0):
        return self.field.partials(r, theta)

    def d_r(self, r):
        return self.partials(r, 0.0)[0]

    def d2_r(self, r):
        if self._d2 is not None:
            return np.asarray(self._d2(r), dtype=float)
        return nm.derivative(self.d_r, np.asarray(r, dtype=float))

    def gradient_norm(self, r, theta=0.0):
        u_r, u_t = self.partials(r, theta)
        if self.radial:
            return np.abs(u_r)
        return np.sqrt(u_r ** 2 + u_t ** 2 / self.profile.w(r) ** 2)

    @property
    def theta(self):
        return np.linspace(0.0, 2 * np.pi, self.n_theta, endpoint=False)

    @cached_property
    def label_range(self):
        a, b = self.profile.base
        if self.radial:
            return float(self(a)), float(self(b))
        th = self.theta
        if self.profile.periodic:
            lo = float(self(a, 0.0))
            return lo, lo + float(self(b, 0.0)) - lo
        return float(np.max(self(a, th))), float(np.min(self(b, th)))

    def _bracket(self):
        a, b = self.profile.base
        pad = self.profile.length if self.profile.periodic else 0.0
        return a - pad, b + pad

    def level(self, t, theta=None):
        """Radius of the level set ``u = t`` above each angle (vectorised in ``t``)."""
        lo, hi = self._bracket()
        t = np.asarray(t, dtype=float)
        if self.radial:
            return nm.invert_increasing(lambda r: self(r), t, lo, hi)
        theta = self.theta if theta is None else np.asarray(theta, dtype=float)
        T, TH = np.broadcast_arrays(t[..., None], theta)
        return nm.invert_increasing(lambda r: self(r, TH), T, lo, hi)

    def leaf_integral(self, fn, t):
        """``int_{u = t} fn dmu`` for ``fn(r, theta)`` (vectorised in ``t``)."""
        t = np.asarray(t, dtype=float)
        if self.radial:
            rho = self.level(t)
            return self.profile.sigma(rho) * fn(rho, 0.0 * rho)
        th = self.theta
        rho = self.level(t, th)
        u_r, u_t = self.partials(rho, th)
        rho_th = -u_t / u_r
        weights = np.sqrt(rho_th ** 2 + self.profile.w(rho) ** 2) * (2 * np.pi / th.size)
        return np.sum(fn(rho, th + 0.0 * rho) * weights, axis=-1)

    def nu(self, t, q):
        """``nu(t) = int_{u = t} |grad u|^(q-1)``."""
        return self.leaf_integral(lambda r, th: self.gradient_norm(r, th) ** (q - 1), t)

    def foliation(self, chart, substeps=4):
        """The foliation by level sets of ``u``, labelled by the value of ``u``."""
        if chart.profile is not self.profile:
            raise ValueError("chart and level-set function live on different profiles")
        lo, hi = self.label_range
        if not hi > lo:
            raise DomainError("level-set function has an empty range on the chart")
        t = np.linspace(lo, hi, chart.n_r, endpoint=not self.profile.periodic)
        if self.radial:
            rho = self._radial_levels(t, substeps)
            rho_t = 1.0 / self.d_r(rho)
            return GraphFoliation(
                self.profile, chart.mode, t, rho[:, None], rho_t[:, None], 0.0, 0.0,
                n_theta=chart.n_theta, name=f"levels({self.name})",
                leaf_fn=lambda tt, th: (self.level(tt) + 0.0 * th, 0.0 * th))
        if chart.mode != "surface":
            raise DomainError("a theta-dependent level function needs a surface chart")
        th = chart.theta
        rho = self.level(t, th)
        u_r, u_t = self.partials(rho, th)
        rho_th = -u_t / u_r
        rho_thth = nm.diff(rho_th, chart.dtheta, axis=1, periodic=True)

        def leaf_fn(tt, theta):
            rr = self.level(np.asarray(tt), theta)
            ur, ut = self.partials(rr, theta)
            return rr, -ut / ur
        return GraphFoliation(self.profile, "surface", t, rho, 1.0 / u_r, rho_th, rho_thth,
                              n_theta=chart.n_theta, name=f"levels({self.name})",
                              leaf_fn=leaf_fn)

    def _radial_levels(self, t, substeps):
        """Integrate ``d rho/dt = 1/u'(rho)`` from the inner boundary through the labels."""
        rho = np.empty_like(t)
        rho[0] = self.profile.base[0]
        for i in range(1, t.size):
            rho[i] = nm.rk4(lambda y: 1.0 / self.d_r(y), rho[i - 1], t[i] - t[i - 1], substeps)
        if not self.profile.periodic:
            end = self.profile.base[1]
            if abs(rho[-1] - end) > 1e-8 * self.profile.length:
                raise NumericalError(
                    f"level integration missed the outer boundary by {rho[-1] - end:.3g}")
            rho[-1] = min(rho[-1], end)
        return rho


def flow_normal_field(fol, X, t, steps=64):
    """Image of ``fol`` under the time-``t`` flow of ``X = f d/dr``.

    Integrates ``dr/ds = f(r, theta)``, ``dtheta/ds = 0`` with classical RK4 at
    fixed step ``t / steps``, together with the variational equations for
    ``rho_t`` and ``rho_theta`` so the flowed leaves carry exact-to-ODE-order
    derivatives.  ``rho_thth`` is recovered by periodic differencing in theta.
    """
    if isinstance(X, NormalField):
        X.check_support(fol)
    _, theta = fol.nodes
    radial = fol.mode == "radial"

    def rhs(y):
        r = y[0]
        f, f_r, f_th = X.evaluate(r, theta)
        if radial:
            f_th = 0.0 * f_th
        return np.stack([f, f_r * y[1], f_r * y[2] + f_th])

    y0 = np.stack([fol.rho, fol.rho_t, fol.rho_theta])
    y = nm.rk4(rhs, y0, t, steps) if t != 0 else y0
    rho, rho_t, rho_th = y
    bad = np.argwhere(~(rho_t >= EPS_MONO))
    if bad.size:
        label = float(fol.t[bad[0][0]])
        raise FlowDegeneracyError(f"flow lost monotonicity on leaf t = {label:.6g}",
                                  leaf_label=label)
    if radial:
        rho_thth = np.zeros_like(rho)
    else:
        rho_thth = nm.diff(rho_th, fol.dtheta, axis=1, periodic=True)
    return GraphFoliation(fol.profile, fol.mode, fol.t, rho, rho_t, rho_th, rho_thth,
                          n_theta=fol.theta.size, name=f"{fol.name}|flow(t={t:g})")


def _antiderivative(dlam, lo, hi, periodic, n=2049):
    """``lambda(tau) = int_lo^tau dlam`` from a cubic spline of ``dlam`` (error O(h^4)).

    On a circle base ``dlam`` is periodic and ``lambda`` advances by one period
    integral per turn.
    """
    tau = np.linspace(lo, hi, n)
    vals = np.asarray(dlam(tau), dtype=float)
    if np.any(~(vals > 0)) or not np.all(np.isfinite(vals)):
        raise DomainError("nu must be positive to normalise a level-set function")
    if periodic:
        vals[-1] = vals[0]
    prim = interpolate.CubicSpline(tau, vals, bc_type="periodic" if periodic else "not-a-knot")
    prim = prim.antiderivative()
    period = float(prim(hi))

    def lam(x):
        x = np.asarray(x, dtype=float)
        if not periodic:
            return prim(x)
        turns = np.floor((x - lo) / (hi - lo))
        return turns * period + prim(x - turns * (hi - lo))
    return lam


def normalize_levelset(u, p):
    """Reparametrise ``u`` as ``v = lambda(u)`` with ``lambda' = nu^(1-p)``.

    The leaves are unchanged and ``(|grad v|^(q-1))^ = 1`` on every leaf, so
    ``|grad v|^(q-1)`` is the extremal function of the foliation.
    """
    if not p > 1:
        raise DomainError("p must exceed 1")
    q = p / (p - 1.0)
    profile = u.profile
    lo, hi = u.label_range

    def dlam(tau):
        return u.nu(tau, q) ** (1 - p)

    lam = _antiderivative(dlam, lo, hi, profile.periodic)
    if u.radial:
        # the level through r is the slice {r} itself: nu(u(r)) = sigma(r)|u'(r)|^(q-1)
        def dv(r):
            du = u.d_r(r)
            return (profile.sigma(r) * np.abs(du) ** (q - 1)) ** (1 - p) * du

        return LevelSetFunction(profile, lambda r: lam(u(r)), dv, radial=True,
                                n_theta=u.n_theta, name=f"normalized({u.name})")

    def v_r(r, theta):
        return dlam(u(r, theta)) * u.partials(r, theta)[0]

    def v_theta(r, theta):
        return dlam(u(r, theta)) * u.partials(r, theta)[1]
    return LevelSetFunction(profile, lambda r, theta: lam(u(r, theta)), v_r, v_theta,
                            n_theta=u.n_theta, name=f"normalized({u.name})")


def write_grid_csv(stream, values, header="value"):
    """Write ``(r_index, theta_index, value)`` rows for a grid array."""
    arr = np.atleast_2d(np.asarray(values, dtype=float).T).T
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["r_index", "theta_index", header])
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            writer.writerow([i, j, format(arr[i, j], ".17g")])

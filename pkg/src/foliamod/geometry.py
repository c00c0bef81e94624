"""Warped-product manifolds ``dr^2 + w(r)^2 g_fiber`` and their discretisation.

The base is either a closed interval ``[a, b]`` or a circle of circumference
``L`` (parametrised by ``[0, L)``).  The fiber is the unit round sphere of
dimension ``fiber_dim``; for ``fiber_dim == 1`` this is the unit circle with
angle coordinate ``theta``.

The unit normal to the leaves ``{r = const}`` is ``N = d/dr``.  With this
orientation the scalar mean curvature of the leaves is ``-k w'/w``, so that
the identity ``div(nabla_N N) = -N(h) + |Pi|^2 + Ric(N)`` holds with ``+``
signs as written.
"""

from dataclasses import dataclass, field
from math import gamma, pi
from typing import Callable

import numpy as np

from . import _numerics as nm
from .errors import DomainError

FAMILIES = ("cylinder", "euclidean", "hyperbolic", "spherical", "custom")
W_MIN = 1e-6


def unit_sphere_volume(k):
    """Volume of the unit round k-sphere, ``2 pi^((k+1)/2) / Gamma((k+1)/2)``."""
    return 2.0 * pi ** ((k + 1) / 2.0) / gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class WarpProfile:
    """Warped-product metric with closed-form warp and its first two derivatives."""

    family: str
    w: Callable = field(repr=False)
    dw: Callable = field(repr=False)
    d2w: Callable = field(repr=False)
    base: tuple = (0.0, 1.0)
    periodic: bool = False
    fiber_dim: int = 1
    fiber_volume: float = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown profile family {self.family!r}")
        if int(self.fiber_dim) != self.fiber_dim or self.fiber_dim < 1:
            raise DomainError("fiber_dim must be a positive integer")
        a, b = (float(x) for x in self.base)
        if not b > a:
            raise DomainError(f"base must satisfy a < b, got {self.base}")
        object.__setattr__(self, "base", (a, b))
        if self.fiber_volume is None:
            object.__setattr__(self, "fiber_volume", unit_sphere_volume(self.fiber_dim))
        elif not self.fiber_volume > 0:
            raise DomainError("fiber_volume must be positive")
        self._validate()

    def _validate(self, n=257):
        a, b = self.base
        r = np.linspace(a, b, n)
        w = np.asarray(self.w(r), dtype=float) * np.ones_like(r)
        if not np.all(np.isfinite(w)) or w.min() < W_MIN:
            raise DomainError(
                f"warp must satisfy w >= {W_MIN} on the base; min is {w.min():.3g}")
        h = 1e-4 * (b - a)
        for name, fn, deriv in (("w'", self.w, self.dw), ("w''", self.dw, self.d2w)):
            supplied = np.asarray(deriv(r), dtype=float) * np.ones_like(r)
            central = (np.asarray(fn(r + h)) - np.asarray(fn(r - h))) / (2 * h)
            scale = np.maximum(1.0, np.abs(w))
            if np.max(np.abs(supplied - central) / scale) > 1e-6:
                raise DomainError(f"supplied {name} disagrees with central differences")

    # -- constructors ---------------------------------------------------------------

    @classmethod
    def cylinder(cls, a=0.0, b=1.0, c=1.0, fiber_dim=1, fiber_volume=None):
        c = float(c)
        return cls("cylinder", lambda r: c + 0.0 * np.asarray(r), lambda r: 0.0 * np.asarray(r),
                   lambda r: 0.0 * np.asarray(r), (a, b), False, fiber_dim, fiber_volume,
                   {"c": c})

    @classmethod
    def torus(cls, length=1.0, c=1.0, fiber_volume=None):
        """Flat torus: constant warp over a circle base of circumference ``length``."""
        c = float(c)
        return cls("cylinder", lambda r: c + 0.0 * np.asarray(r), lambda r: 0.0 * np.asarray(r),
                   lambda r: 0.0 * np.asarray(r), (0.0, length), True, 1, fiber_volume,
                   {"c": c})

    @classmethod
    def euclidean(cls, a=1.0, b=2.0, fiber_dim=1, fiber_volume=None):
        return cls("euclidean", lambda r: np.asarray(r, dtype=float),
                   lambda r: 1.0 + 0.0 * np.asarray(r), lambda r: 0.0 * np.asarray(r),
                   (a, b), False, fiber_dim, fiber_volume)

    @classmethod
    def hyperbolic(cls, a=1.0, b=2.0, fiber_dim=1, fiber_volume=None):
        return cls("hyperbolic", np.sinh, np.cosh, np.sinh, (a, b), False, fiber_dim,
                   fiber_volume)

    @classmethod
    def spherical(cls, a=pi / 4, b=3 * pi / 4, fiber_dim=1, fiber_volume=None):
        if a <= 0 or b >= pi:
            raise DomainError("spherical band must avoid the poles r = 0 and r = pi")
        return cls("spherical", np.sin, np.cos, lambda r: -np.sin(r), (a, b), False,
                   fiber_dim, fiber_volume)

    @classmethod
    def polynomial(cls, coefficients, a, b, fiber_dim=1, fiber_volume=None, periodic=False):
        """Custom warp ``w(r) = sum_i c_i r^i``."""
        poly = np.polynomial.Polynomial(coefficients)
        d1, d2 = poly.deriv(1), poly.deriv(2)
        return cls("custom", poly, d1, d2, (a, b), periodic, fiber_dim, fiber_volume,
                   {"coefficients": list(map(float, coefficients))})

    @classmethod
    def custom(cls, w, dw, d2w, a, b, fiber_dim=1, fiber_volume=None, periodic=False):
        return cls("custom", w, dw, d2w, (a, b), periodic, fiber_dim, fiber_volume)

    def with_fiber_volume(self, fiber_volume):
        return WarpProfile(self.family, self.w, self.dw, self.d2w, self.base, self.periodic,
                           self.fiber_dim, fiber_volume, self.params)

    # -- pointwise geometry ---------------------------------------------------------

    @property
    def length(self):
        return self.base[1] - self.base[0]

    def contains(self, r, tol=1e-12):
        if self.periodic:
            return np.ones_like(np.asarray(r), dtype=bool)
        a, b = self.base
        r = np.asarray(r)
        return (r >= a - tol * self.length) & (r <= b + tol * self.length)

    def sigma(self, r):
        """Leaf volume ``V_k w(r)^k`` (no domain check)."""
        return self.fiber_volume * np.asarray(self.w(r), dtype=float) ** self.fiber_dim

    def dsigma(self, r):
        k = self.fiber_dim
        return self.fiber_volume * k * np.asarray(self.w(r)) ** (k - 1) * self.dw(r)

    def curvature(self, r):
        """Sectional curvature of planes containing ``N``: ``-w''/w``."""
        return -np.asarray(self.d2w(r)) / np.asarray(self.w(r))


def leaf_volume(profile, r):
    """Volume ``sigma(r) = V_k w(r)^k`` of the leaf ``{r}`` x fiber."""
    if not np.all(profile.contains(r)):
        raise DomainError(f"r = {r} lies outside the base {profile.base}")
    out = profile.sigma(r)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GridChart:
    """Uniform grid over the base (and, in surface mode, over the fiber circle).

    In radial mode ``theta`` is the single node ``0`` and fields are functions
    of ``r`` only; arrays have shape ``(n_r, 1)`` (a 1-D array of length
    ``n_r`` is accepted wherever a field is expected).
    """

    profile: WarpProfile
    n_r: int = 256
    n_theta: int = 1
    mode: str = "radial"

    def __post_init__(self):
        if self.mode not in ("radial", "surface"):
            raise DomainError(f"unknown chart mode {self.mode!r}")
        if self.mode == "surface":
            if self.profile.fiber_dim != 1:
                raise DomainError("surface mode requires fiber_dim == 1")
            if self.n_theta < 5:
                raise DomainError("surface mode needs n_theta >= 5")
        else:
            object.__setattr__(self, "n_theta", 1)

    @property
    def r(self):
        a, b = self.profile.base
        return np.linspace(a, b, self.n_r, endpoint=not self.profile.periodic)

    @property
    def dr(self):
        a, b = self.profile.base
        return (b - a) / (self.n_r if self.profile.periodic else self.n_r - 1)

    @property
    def theta(self):
        if self.mode == "radial":
            return np.zeros(1)
        return np.linspace(0.0, 2 * pi, self.n_theta, endpoint=False)

    @property
    def dtheta(self):
        return 2 * pi / self.n_theta

    @property
    def r_weights(self):
        return nm.uniform_weights(self.n_r, self.dr, self.profile.periodic)

    def mesh(self):
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def volume_weights(self):
        """Weights for the Riemannian volume measure at the chart nodes."""
        r = self.r
        if self.mode == "radial":
            return (self.r_weights * self.profile.sigma(r))[:, None]
        return (self.r_weights * self.profile.w(r))[:, None] * np.full(
            (1, self.n_theta), self.dtheta)

    def sample(self, fld):
        """Evaluate a callable on the nodes, or validate the shape of an array."""
        if callable(fld):
            R, T = self.mesh()
            return np.asarray(fld(R, T), dtype=float) * np.ones_like(R)
        arr = np.asarray(fld, dtype=float)
        shape = (self.n_r, self.n_theta)
        if arr.shape == (self.n_r,) and self.mode == "radial":
            arr = arr[:, None]
        if arr.shape != shape:
            raise ValueError(f"field shape {arr.shape} does not match chart {shape}")
        return arr

    def d_dr(self, values):
        return nm.diff(self.sample(values), self.dr, axis=0, periodic=self.profile.periodic)

    def d_dtheta(self, values):
        values = self.sample(values)
        if self.mode == "radial":
            return np.zeros_like(values)
        return nm.diff(values, self.dtheta, axis=1, periodic=True)


def volume_integral(chart, fld):
    """Quadrature of ``fld`` against the Riemannian volume of the chart."""
    return float(np.sum(chart.volume_weights() * chart.sample(fld)))


@dataclass(frozen=True)
class GeometryQuantities:
    """Per-node curvature data of the leaves ``{r = const}``."""

    r: np.ndarray
    sigma: np.ndarray
    mean_curvature: np.ndarray
    second_fundamental_sq: np.ndarray
    ricci_normal: np.ndarray
    normal_curvature: np.ndarray
    div_normal_curvature: np.ndarray
    bko_residual: np.ndarray


def curvature_quantities(profile, n_r=512):
    """Closed-form leaf geometry on ``n_r`` uniform base nodes.

    ``N(h)`` inside the reported identity residual is a fourth-order finite
    difference of the sampled mean curvature, so the residual measures the
    consistency of the closed forms rather than restating them.
    """
    a, b = profile.base
    r = np.linspace(a, b, n_r, endpoint=not profile.periodic)
    dr = (b - a) / (n_r if profile.periodic else n_r - 1)
    k = profile.fiber_dim
    ratio = np.asarray(profile.dw(r)) / np.asarray(profile.w(r))
    h = -k * ratio
    pi_sq = k * ratio ** 2
    ric = -k * np.asarray(profile.d2w(r)) / np.asarray(profile.w(r))
    zeros = np.zeros_like(r)
    dh = nm.diff(h, dr, periodic=profile.periodic)
    residual = dh - pi_sq - ric + zeros
    return GeometryQuantities(r, profile.sigma(r), h, pi_sq, ric, zeros, zeros, residual)


def bko_residual(profile, n_r=512):
    """Max |N(h) - |Pi|^2 - Ric(N) + div(nabla_N N)| over interior nodes."""
    res = curvature_quantities(profile, n_r).bko_residual
    if not profile.periodic:
        res = res[2:-2]
    return float(np.max(np.abs(res)))

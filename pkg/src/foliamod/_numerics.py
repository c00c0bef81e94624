"""Low-level numerical kernels: finite-difference stencils, quadrature weights, RK4.

All stencils are fourth order.  Interior nodes use the 5-point central
stencil; on non-periodic axes the first and last two nodes fall back to
5-point one-sided stencils of the same order.
"""

import numpy as np

_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_EDGE0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_EDGE1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
_EDGE0_2 = np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0
_EDGE1_2 = np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0

# "alternative extended Simpson" end corrections, O(h^4)
_END_WEIGHTS = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0


def diff(values, h, axis=0, periodic=False):
    """Fourth-order first derivative of samples on a uniform grid along ``axis``."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if periodic:
        out = (np.roll(f, 2, 0) - 8.0 * np.roll(f, 1, 0)
               + 8.0 * np.roll(f, -1, 0) - np.roll(f, -2, 0)) / (12.0 * h)
        return np.moveaxis(out, 0, axis)
    if n < 5:
        raise ValueError(f"need at least 5 nodes for a fourth-order stencil, got {n}")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    out[0] = np.tensordot(_EDGE0, f[:5], axes=1) / h
    out[1] = np.tensordot(_EDGE1, f[:5], axes=1) / h
    out[-1] = -np.tensordot(_EDGE0, f[::-1][:5], axes=1) / h
    out[-2] = -np.tensordot(_EDGE1, f[::-1][:5], axes=1) / h
    return np.moveaxis(out, 0, axis)


def diff2(values, h, axis=0, periodic=False):
    """Fourth-order second derivative along ``axis`` (6-point one-sided at the ends)."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    if periodic:
        out = (-np.roll(f, 2, 0) + 16.0 * np.roll(f, 1, 0) - 30.0 * f
               + 16.0 * np.roll(f, -1, 0) - np.roll(f, -2, 0)) / (12.0 * h * h)
        return np.moveaxis(out, 0, axis)
    if f.shape[0] < 6:
        raise ValueError(f"need at least 6 nodes for a fourth-order stencil, got {f.shape[0]}")
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    out[0] = np.tensordot(_EDGE0_2, f[:6], axes=1) / h ** 2
    out[1] = np.tensordot(_EDGE1_2, f[:6], axes=1) / h ** 2
    out[-1] = np.tensordot(_EDGE0_2, f[::-1][:6], axes=1) / h ** 2
    out[-2] = np.tensordot(_EDGE1_2, f[::-1][:6], axes=1) / h ** 2
    return np.moveaxis(out, 0, axis)


def partials(fn, r, theta, h=1e-3):
    """Fourth-order central differences of a pointwise callable ``fn(r, theta)``."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d_r = (fn(r - 2 * h, theta) - 8 * fn(r - h, theta)
           + 8 * fn(r + h, theta) - fn(r + 2 * h, theta)) / (12 * h)
    d_t = (fn(r, theta - 2 * h) - 8 * fn(r, theta - h)
           + 8 * fn(r, theta + h) - fn(r, theta + 2 * h)) / (12 * h)
    return d_r, d_t


def derivative(fn, x, h=1e-3):
    """Fourth-order central difference of a scalar callable of one variable."""
    return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h)


def uniform_weights(n, h, periodic=False):
    """Quadrature weights on ``n`` uniform nodes with spacing ``h``.

    Periodic grids get the plain rectangle rule (spectrally accurate for smooth
    periodic integrands).  Closed intervals get trapezoid weights with
    fourth-order end corrections.
    """
    if periodic:
        return np.full(n, h)
    if n < 8:
        raise ValueError(f"need at least 8 nodes on a closed interval, got {n}")
    w = np.ones(n)
    w[:4] = _END_WEIGHTS
    w[-4:] = _END_WEIGHTS[::-1]
    return w * h


def rk4(rhs, y0, t_end, steps):
    """Integrate ``dy/ds = rhs(y)`` from s = 0 to ``t_end`` with classical RK4.

    ``y0`` may be any array (or tuple of arrays packed by the caller); the step
    is fixed to ``t_end / steps``.
    """
    y = np.array(y0, dtype=float, copy=True)
    if steps <= 0:
        raise ValueError("steps must be positive")
    dt = t_end / steps
    for _ in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return y


def invert_increasing(fn, target, lo, hi, iterations=80):
    """Vectorised bisection for ``fn(x) = target`` with ``fn`` increasing on [lo, hi]."""
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)

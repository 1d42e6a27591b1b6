"""Pure-numpy implementations of the hot kernels.

This is the reference backend: every function here is vectorized numpy
and serves as the fallback when numba is unavailable or disabled
through ``YMHS_BACKEND``.  The numba backend must agree with these
functions to roundoff; a parity test pins that.

All kernels work on the u(1) model used by the flows: ``phi`` is a
(3, N, N) sphere-valued field, ``a`` a (2, N, N) real connection.
Grid axes are always the last two array axes; ``axis`` arguments are
grid axes (0 for x1, 1 for x2).
"""

import numpy as np

NAME = "numpy"


def central_diff(f, axis, h):
    """Second-order periodic central difference along a grid axis.

    Sliced assembly instead of ``np.roll`` keeps the per-call
    allocation down; this function carries the flow drivers when the
    compiled backend is disabled.
    """
    out = np.empty_like(f)
    if axis == 0:
        np.subtract(f[..., 2:, :], f[..., :-2, :], out=out[..., 1:-1, :])
        np.subtract(f[..., 1, :], f[..., -1, :], out=out[..., 0, :])
        np.subtract(f[..., 0, :], f[..., -2, :], out=out[..., -1, :])
    elif axis == 1:
        np.subtract(f[..., 2:], f[..., :-2], out=out[..., 1:-1])
        np.subtract(f[..., 1], f[..., -1], out=out[..., 0])
        np.subtract(f[..., 0], f[..., -2], out=out[..., -1])
    else:
        raise ValueError(f"grid axis must be 0 or 1, got {axis}")
    out *= 1.0 / (2.0 * h)
    return out


def codiff_oneform(b, h):
    """L2-adjoint of the scalar gradient: -(d1 b1 + d2 b2)."""
    out = central_diff(b[0], 0, h)
    out += central_diff(b[1], 1, h)
    return -out


def grad_scalar(s, h):
    """Componentwise gradient (d1 s, d2 s) of a scalar field."""
    return np.stack((central_diff(s, 0, h), central_diff(s, 1, h)))


def cross_e3(v):
    """e3 x v for a (3, N, N) field."""
    out = np.empty_like(v)
    np.negative(v[1], out=out[0])
    out[1] = v[0]
    out[2] = 0.0
    return out


def cross(u, v):
    """Pointwise cross product of two (3, N, N) fields."""
    out = np.empty_like(u)
    out[0] = u[1] * v[2] - u[2] * v[1]
    out[1] = u[2] * v[0] - u[0] * v[2]
    out[2] = u[0] * v[1] - u[1] * v[0]
    return out


def dot(u, v):
    """Pointwise inner product of two (3, N, N) fields -> (N, N)."""
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def tangent_project(phi, v):
    """Remove the phi-component of v pointwise (phi unit-norm)."""
    return v - dot(v, phi) * phi


def cov_deriv_raw(phi, a, h):
    """Unprojected covariant derivative W_i = d_i phi + a_i (e3 x phi).

    Returns a (2, 3, N, N) array.  This is the object whose squared l2
    norm the discrete energy integrates; the geometric (projected)
    covariant derivative is its tangential part.
    """
    x = cross_e3(phi)
    w = np.empty((2,) + phi.shape, dtype=phi.dtype)
    w[0] = central_diff(phi, 0, h)
    w[0] += a[0] * x
    w[1] = central_diff(phi, 1, h)
    w[1] += a[1] * x
    return w


def ymh_gradient(phi, a, h):
    """Driving gradient pair (gphi, ga) of the Yang-Mills-Higgs flows.

    gphi = covariant Laplacian of phi (adjoint form, tangent to phi)
           plus the moment term mu(phi) grad mu(phi),
    ga   = codifferential of the curvature plus the matter current
           <W_i, e3 x phi>.

    Built from the unprojected covariant derivative W_i so that the
    pair is the exact discrete gradient (up to the recorded factor 2)
    of the discrete energy functional; see ymhs.energy.  Third
    components of e3-cross terms vanish identically and are skipped.
    """
    x0, x1 = -phi[1], phi[0]
    w1 = central_diff(phi, 0, h)
    w1[0] += a[0] * x0
    w1[1] += a[0] * x1
    w2 = central_diff(phi, 1, h)
    w2[0] += a[1] * x0
    w2[1] += a[1] * x1

    # covariant divergence of (w1, w2), then tangential projection
    div = central_diff(w1, 0, h)
    div += central_diff(w2, 1, h)
    div[0] -= a[0] * w1[1] + a[1] * w2[1]
    div[1] += a[0] * w1[0] + a[1] * w2[0]
    gphi = tangent_project(phi, div)
    np.negative(gphi, out=gphi)

    # moment term: mu = phi3, tangential gradient of mu is e3 - mu*phi
    mu = phi[2]
    mmu = -mu
    gphi[0] += mmu * mu * phi[0]
    gphi[1] += mmu * mu * phi[1]
    gphi[2] += mu * (1.0 - mu * phi[2])

    # curvature codifferential (d2 F, -d1 F) plus the current term
    f12 = central_diff(a[1], 0, h)
    f12 -= central_diff(a[0], 1, h)
    ga = np.empty_like(a)
    ga[0] = central_diff(f12, 1, h)
    ga[0] += w1[0] * x0 + w1[1] * x1
    np.negative(central_diff(f12, 0, h), out=ga[1])
    ga[1] += w2[0] * x0 + w2[1] * x1
    return gphi, ga

"""Numba-compiled hot kernels.

Fused loop versions of the kernels in :mod:`ymhs.kernels.numpy_backend`.
The flow drivers call these thousands of times per run (four times per
RK4 step), so the gradient assembly is fused into two passes over the
grid instead of a dozen numpy temporaries.  Results agree with the
numpy backend to roundoff; a consistency test pins that.

Pointwise helpers (cross, dot, projection) are re-exported from the
numpy backend: they are memory-bound and vectorized numpy is already
optimal for them.
"""

import numpy as np
from numba import njit

from .numpy_backend import cross, cross_e3, dot, tangent_project  # noqa: F401

NAME = "numba"


@njit(cache=True)
def central_diff(f, axis, h):
    n0, n1 = f.shape
    out = np.empty_like(f)
    c = 1.0 / (2.0 * h)
    if axis == 0:
        for i in range(n0):
            ip = i + 1 if i + 1 < n0 else 0
            im = i - 1 if i >= 1 else n0 - 1
            for j in range(n1):
                out[i, j] = (f[ip, j] - f[im, j]) * c
    else:
        for i in range(n0):
            for j in range(n1):
                jp = j + 1 if j + 1 < n1 else 0
                jm = j - 1 if j >= 1 else n1 - 1
                out[i, j] = (f[i, jp] - f[i, jm]) * c
    return out


@njit(cache=True)
def codiff_oneform(b, h):
    n = b.shape[1]
    out = np.empty((n, n), dtype=b.dtype)
    c = 1.0 / (2.0 * h)
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i >= 1 else n - 1
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j >= 1 else n - 1
            out[i, j] = -((b[0, ip, j] - b[0, im, j]) * c
                          + (b[1, i, jp] - b[1, i, jm]) * c)
    return out


@njit(cache=True)
def grad_scalar(s, h):
    n = s.shape[0]
    out = np.empty((2, n, n), dtype=s.dtype)
    c = 1.0 / (2.0 * h)
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i >= 1 else n - 1
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j >= 1 else n - 1
            out[0, i, j] = (s[ip, j] - s[im, j]) * c
            out[1, i, j] = (s[i, jp] - s[i, jm]) * c
    return out


@njit(cache=True)
def cov_deriv_raw(phi, a, h):
    n = phi.shape[1]
    w = np.empty((2, 3, n, n), dtype=phi.dtype)
    c = 1.0 / (2.0 * h)
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i >= 1 else n - 1
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j >= 1 else n - 1
            x0 = -phi[1, i, j]
            x1 = phi[0, i, j]
            a0 = a[0, i, j]
            a1 = a[1, i, j]
            w[0, 0, i, j] = (phi[0, ip, j] - phi[0, im, j]) * c + a0 * x0
            w[0, 1, i, j] = (phi[1, ip, j] - phi[1, im, j]) * c + a0 * x1
            w[0, 2, i, j] = (phi[2, ip, j] - phi[2, im, j]) * c
            w[1, 0, i, j] = (phi[0, i, jp] - phi[0, i, jm]) * c + a1 * x0
            w[1, 1, i, j] = (phi[1, i, jp] - phi[1, i, jm]) * c + a1 * x1
            w[1, 2, i, j] = (phi[2, i, jp] - phi[2, i, jm]) * c
    return w


@njit(cache=True)
def ymh_gradient(phi, a, h):
    n = phi.shape[1]
    w = cov_deriv_raw(phi, a, h)
    c = 1.0 / (2.0 * h)

    # curvature F12 = d1 a2 - d2 a1
    f12 = np.empty((n, n), dtype=phi.dtype)
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i >= 1 else n - 1
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j >= 1 else n - 1
            f12[i, j] = (a[1, ip, j] - a[1, im, j]) * c \
                - (a[0, i, jp] - a[0, i, jm]) * c

    gphi = np.empty((3, n, n), dtype=phi.dtype)
    ga = np.empty((2, n, n), dtype=phi.dtype)
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i >= 1 else n - 1
        for j in range(n):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j >= 1 else n - 1
            a0 = a[0, i, j]
            a1 = a[1, i, j]
            # covariant divergence of (w1, w2)
            d0 = (w[0, 0, ip, j] - w[0, 0, im, j]) * c \
                + (w[1, 0, i, jp] - w[1, 0, i, jm]) * c \
                + a0 * (-w[0, 1, i, j]) + a1 * (-w[1, 1, i, j])
            d1 = (w[0, 1, ip, j] - w[0, 1, im, j]) * c \
                + (w[1, 1, i, jp] - w[1, 1, i, jm]) * c \
                + a0 * w[0, 0, i, j] + a1 * w[1, 0, i, j]
            d2 = (w[0, 2, ip, j] - w[0, 2, im, j]) * c \
                + (w[1, 2, i, jp] - w[1, 2, i, jm]) * c
            p0 = phi[0, i, j]
            p1 = phi[1, i, j]
            p2 = phi[2, i, j]
            dp = d0 * p0 + d1 * p1 + d2 * p2
            mu = p2
            gphi[0, i, j] = -(d0 - dp * p0) + mu * (-mu * p0)
            gphi[1, i, j] = -(d1 - dp * p1) + mu * (-mu * p1)
            gphi[2, i, j] = -(d2 - dp * p2) + mu * (1.0 - mu * p2)
            # codifferential of the curvature plus the matter current
            ga[0, i, j] = (f12[i, jp] - f12[i, jm]) * c \
                + (w[0, 0, i, j] * (-p1) + w[0, 1, i, j] * p0)
            ga[1, i, j] = -(f12[ip, j] - f12[im, j]) * c \
                + (w[1, 0, i, j] * (-p1) + w[1, 1, i, j] * p0)
    return gphi, ga

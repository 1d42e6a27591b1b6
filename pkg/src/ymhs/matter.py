"""Sphere-valued matter fields under the circle action.

The fiber model is the unit sphere S^2 in R^3 with the U(1) action of
rotations about e3.  Concretely:

* infinitesimal action   X(y) = e3 x y          (Killing field)
* complex structure      J(y) v = y x v
* moment map             mu(y) = y3, with tangential gradient e3 - y3 y
* second fundamental form  II(y)(v, w) = -<v, w> y  (outward normal)

so the fiberwise derivative of the Killing field along a tangent
vector Y is  S(Y) = e3 x Y + <e3 x phi, Y> phi,  which is exactly
tangent and skew-symmetric.

Sections phi are (3, N, N) unit-vector fields; vertical fields Y are
(3, N, N) fields with <Y, phi> = 0 pointwise.  The connection enters
through its u(1) components, a bare (2, N, N) array.

The covariant derivative of a section is realized extrinsically by
projecting the raw central difference back to the tangent plane.  Its
adjoint (the covariant codifferential) is built as the exact discrete
L2-adjoint, so pairing identities used by the energy bookkeeping hold
to roundoff, not merely to discretization order.
"""

import numpy as np

from . import kernels
from .grid import l2_inner, l2_norm

TANGENCY_TOL = 1e-8


class BlowUpError(RuntimeError):
    """A section left the chart where normalization is meaningful."""


def unit_violation(phi):
    """Max-site deviation of |phi| from 1."""
    return float(np.max(np.abs(np.sqrt(kernels.dot(phi, phi)) - 1.0)))


def tangency_violation(phi, y):
    """Max-site |<Y, phi>|."""
    return float(np.max(np.abs(kernels.dot(y, phi))))


def _require_tangent(phi, y, tol=TANGENCY_TOL):
    # tolerance scales with the field magnitude so that large (e.g.
    # near-blow-up) but structurally tangent fields are not rejected
    v = tangency_violation(phi, y)
    if v > tol * max(1.0, float(np.max(np.abs(y)))):
        raise ValueError(f"field is not tangent to the section: violation {v:.3e}")


def project_to_sphere(raw):
    """Normalize a (3, N, N) field sitewise; guard against collapse.

    A norm below 0.5 anywhere signals that an explicit step left the
    regime where projection is meaningful, so the run must abort
    loudly instead of silently renormalizing garbage.
    """
    norm = np.sqrt(kernels.dot(raw, raw))
    bad = norm < 0.5
    if np.any(bad) or not np.all(np.isfinite(norm)):
        nbad = int(np.count_nonzero(bad | ~np.isfinite(norm)))
        raise BlowUpError(
            f"section norm below 0.5 (or non-finite) at {nbad} sites; "
            f"min |phi| = {float(np.nanmin(norm)):.3e}")
    return raw / norm


def killing_field(phi):
    """Generator of the circle action along phi: X(phi) = e3 x phi."""
    return kernels.cross_e3(phi)


def complex_structure_apply(phi, y):
    """J(phi) Y = phi x Y; maps vertical fields to vertical fields."""
    _require_tangent(phi, y)
    return kernels.cross(phi, y)


def covariant_derivative_section(grid, a, phi):
    """Covariant derivative of a section, shape (2, 3, N, N).

    Component i is the tangential projection of the raw difference
    d_i phi plus the gauge term a_i X(phi); each component is exactly
    tangent to phi.
    """
    w = kernels.cov_deriv_raw(phi, a, grid.h)
    w[0] -= kernels.dot(w[0], phi) * phi
    w[1] -= kernels.dot(w[1], phi) * phi
    return w


def killing_derivative(phi, y):
    """Fiberwise derivative S(Y) of the Killing field along tangent Y.

    S(Y) = e3 x Y + <e3 x phi, Y> phi; exactly tangent along phi and
    skew: <S(Y), W> + <Y, S(W)> = 0 for tangent Y, W.
    """
    return kernels.cross_e3(y) + kernels.dot(kernels.cross_e3(phi), y) * phi


def covariant_derivative_vertical(grid, a, phi, y):
    """Covariant derivative of a vertical field, shape (2, 3, N, N)."""
    _require_tangent(phi, y)
    s = killing_derivative(phi, y)
    out = np.empty((2,) + phi.shape)
    for i in range(2):
        d = np.stack([kernels.central_diff(c, i, grid.h) for c in y])
        out[i] = kernels.tangent_project(phi, d) + a[i] * s
    return out


def vertical_codifferential(grid, a, phi, w):
    """Exact discrete L2-adjoint of the vertical covariant derivative.

    For any one-form of vertical fields w and every exactly tangent Y,
    l2_inner(vertical_codifferential(w), Y) = l2_inner(w, nabla_A Y)
    to roundoff.  The input is projected tangentially first, which is
    what makes the identity exact for arbitrary w.
    """
    wt = np.empty_like(w)
    wt[0] = kernels.tangent_project(phi, w[0])
    wt[1] = kernels.tangent_project(phi, w[1])
    div = np.stack([kernels.central_diff(c, 0, grid.h) for c in wt[0]])
    div += np.stack([kernels.central_diff(c, 1, grid.h) for c in wt[1]])
    div += a[0] * kernels.cross_e3(wt[0]) + a[1] * kernels.cross_e3(wt[1])
    return -kernels.tangent_project(phi, div)


def rough_laplacian(grid, a, phi):
    """Covariant Laplacian nabla_A* nabla_A phi, tangent along phi."""
    return vertical_codifferential(grid, a, phi,
                                   covariant_derivative_section(grid, a, phi))


def moment_term(phi):
    """mu(phi) grad mu(phi) = phi3 (e3 - phi3 phi).

    Pointwise equal to half the tangential gradient of |mu(phi)|^2;
    orthogonal to the Killing field, so the moment map is invariant
    under its own circle action.
    """
    mu = phi[2]
    out = -mu[None] * mu[None] * phi
    out[2] += mu
    return out


def phi_star(grid, a, phi):
    """Matter current (phi* nabla_A phi)_i = <(nabla_A phi)_i, e3 x phi>.

    Dual to the action of one-forms on the section:
    l2_inner(phi_star, B) = sum_i l2_inner((nabla_A phi)_i, B_i X(phi)).
    """
    w = covariant_derivative_section(grid, a, phi)
    x = kernels.cross_e3(phi)
    return np.stack((kernels.dot(w[0], x), kernels.dot(w[1], x)))


def commutator_check(grid, a, phi, y):
    """Residual of the curvature identity for the vertical commutator.

    Compares the discrete commutator [nabla_1, nabla_2] Y against the
    fiber-curvature term R(D_1 phi, D_2 phi) Y plus F_12 S(Y), where R
    is the constant-curvature-one tensor of the sphere and D_i phi the
    covariant derivative of the section.  Returns the pointwise
    residual field and its L2 norm; the norm decays at second order on
    smooth data.
    """
    _require_tangent(phi, y)
    n1y = covariant_derivative_vertical(grid, a, phi, y)
    comm = covariant_derivative_vertical(grid, a, phi, n1y[1])[0] \
        - covariant_derivative_vertical(grid, a, phi, n1y[0])[1]
    d = covariant_derivative_section(grid, a, phi)
    r_term = kernels.dot(d[1], y) * d[0] - kernels.dot(d[0], y) * d[1]
    f12 = kernels.central_diff(a[1], 0, grid.h) - kernels.central_diff(a[0], 1, grid.h)
    rhs = r_term + f12 * killing_derivative(phi, y)
    residual = comm - rhs
    return residual, l2_norm(grid, residual)

"""Connection calculus for Lie-algebra-valued fields on the torus.

Connections are algebra-valued one-forms A = A_i dx^i; the curvature,
covariant exterior derivative and its L2-adjoint are implemented for an
arbitrary structure-constant algebra.  The flows only ever use u(1);
so(3) inputs exercise the bracket terms in unit tests.

Sign conventions, fixed here and certified by tests rather than assumed:

* curvature        F_12 = d1 A2 - d2 A1 + [A1, A2]
* codifferential   (D_A* F)_1 = d2 F + [A2, F]
                   (D_A* F)_2 = -(d1 F + [A1, F])
  which is the exact discrete L2-adjoint of the covariant exterior
  derivative (D_A B)_12 = d1 B2 - d2 B1 + [A1, B2] - [A2, B1].
* gauge action     A -> A - d(theta), phi -> R_z(theta) phi
  for the abelian angle field theta.

In two dimensions the covariant exterior derivative of the curvature is
a three-form and vanishes identically, so the abelian Bianchi identity
is structural; the non-abelian analogue is exercised through the
commutator check of the matter sector.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .algebra import LieAlgebra
from .grid import TorusGrid, l2_inner


@dataclass(frozen=True)
class Connection:
    """Algebra-valued one-form with components comps[i, k] (i: axis, k: algebra)."""

    grid: TorusGrid
    algebra: LieAlgebra
    comps: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=np.float64)
        want = (2, self.algebra.dim, self.grid.N, self.grid.N)
        if comps.shape != want:
            raise ValueError(f"connection components must be {want}, got {comps.shape}")
        if not np.all(np.isfinite(comps)):
            raise ValueError("connection has non-finite entries")
        object.__setattr__(self, "comps", comps)

    @classmethod
    def zero(cls, grid, algebra):
        return cls(grid, algebra, np.zeros((2, algebra.dim, grid.N, grid.N)))


@dataclass(frozen=True)
class Curvature:
    """Algebra-valued two-form, single component F_12 of shape (dim, N, N)."""

    grid: TorusGrid
    algebra: LieAlgebra
    f12: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f12, dtype=np.float64)
        want = (self.algebra.dim, self.grid.N, self.grid.N)
        if f.shape != want:
            raise ValueError(f"curvature component must be {want}, got {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("curvature has non-finite entries")
        object.__setattr__(self, "f12", f)


def _d(grid, f, axis):
    # central difference of a (dim, N, N) stack along torus axis 1|2
    return np.stack([kernels.central_diff(comp, axis - 1, grid.h) for comp in f])


def curvature(conn):
    """Field strength F_12 = d1 A2 - d2 A1 + [A1, A2]."""
    g, alg, a = conn.grid, conn.algebra, conn.comps
    f = _d(g, a[1], 1) - _d(g, a[0], 2)
    if not alg.abelian:
        f = f + alg.bracket(a[0], a[1])
    return Curvature(g, alg, f)


def covariant_derivative_ad(conn, psi):
    """(nabla_A psi)_i = d_i psi + [A_i, psi] for psi of shape (dim, N, N)."""
    g, alg, a = conn.grid, conn.algebra, conn.comps
    if psi.shape != (alg.dim, g.N, g.N):
        raise ValueError(f"section must have shape {(alg.dim, g.N, g.N)}, got {psi.shape}")
    out = np.stack((_d(g, psi, 1), _d(g, psi, 2)))
    if not alg.abelian:
        out[0] += alg.bracket(a[0], psi)
        out[1] += alg.bracket(a[1], psi)
    return out


def exterior_derivative(conn, b):
    """(D_A B)_12 = d1 B2 - d2 B1 + [A1, B2] - [A2, B1] for a one-form B."""
    g, alg, a = conn.grid, conn.algebra, conn.comps
    if b.shape != a.shape:
        raise ValueError(f"one-form must have shape {a.shape}, got {b.shape}")
    out = _d(g, b[1], 1) - _d(g, b[0], 2)
    if not alg.abelian:
        out = out + alg.bracket(a[0], b[1]) - alg.bracket(a[1], b[0])
    return out


def codifferential(conn, curv):
    """Exact discrete L2-adjoint of the covariant exterior derivative.

    Satisfies l2_inner(D_A* F, B) = l2_inner(F, D_A B) for every
    one-form B, to roundoff.
    """
    g, alg, f = conn.grid, conn.algebra, curv.f12
    a = conn.comps
    c1 = _d(g, f, 2)
    c2 = -_d(g, f, 1)
    if not alg.abelian:
        c1 = c1 + alg.bracket(a[1], f)
        c2 = c2 - alg.bracket(a[0], f)
    return np.stack((c1, c2))


def yang_mills_energy(curv):
    """Half the squared L2 norm of the curvature."""
    return 0.5 * l2_inner(curv.grid, curv.f12, curv.f12)


def rotate_z(theta, v):
    """Rotate a (3, N, N) field about e3 by the angle field theta."""
    ct, st = np.cos(theta), np.sin(theta)
    out = np.empty_like(v)
    out[0] = ct * v[0] - st * v[1]
    out[1] = st * v[0] + ct * v[1]
    out[2] = v[2]
    return out


def gauge_transform(grid, theta, a, phi):
    """Abelian gauge action: (A, phi) -> (A - d theta, R_z(theta) phi).

    ``a`` may be a u(1) ``Connection`` or a bare (2, N, N) array; the
    return type matches.  Acting by theta1 and then theta2 equals
    acting by theta1 + theta2, and the curvature is exactly invariant
    because discrete mixed differences of theta commute.
    """
    if isinstance(a, Connection):
        if not a.algebra.abelian:
            raise ValueError("gauge_transform is defined for the abelian model only")
        new = gauge_transform(grid, theta, a.comps[:, 0], phi)
        return Connection(grid, a.algebra, new[0][:, None]), new[1]
    if theta.shape != (grid.N, grid.N):
        raise ValueError(f"gauge angle must be ({grid.N}, {grid.N}), got {theta.shape}")
    a_new = a - kernels.grad_scalar(theta, grid.h)
    return a_new, rotate_z(theta, phi)

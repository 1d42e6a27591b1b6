"""Lie algebras given by structure constants.

The flows run on u(1); so(3) exists to exercise the non-abelian paths
of the connection calculus (curvature, covariant derivatives, the
codifferential) in unit tests.  The inner product is the identity
pairing on coordinates, so for the adjoint computations to close the
structure constants must be totally antisymmetric, which holds for the
compact algebras built here and is checked at construction.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants c[k, i, j] for [e_i, e_j] = c[k, i, j] e_k."""

    name: str
    dim: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.shape != (self.dim,) * 3:
            raise ValueError(f"structure constants must be {(self.dim,)*3}, got {c.shape}")
        if not np.allclose(c, -np.transpose(c, (0, 2, 1)), atol=1e-14):
            raise ValueError("structure constants are not antisymmetric in (i, j)")
        # Jacobi: sum_l c[l,j,k] c[m,i,l] + cyclic in (i,j,k) = 0
        jac = (np.einsum("ljk,mil->mijk", c, c)
               + np.einsum("lki,mjl->mijk", c, c)
               + np.einsum("lij,mkl->mijk", c, c))
        if not np.allclose(jac, 0.0, atol=1e-12):
            raise ValueError("structure constants violate the Jacobi identity")
        object.__setattr__(self, "c", c)

    @property
    def abelian(self):
        return not np.any(self.c)

    def bracket(self, u, v):
        """[u, v] for fields of shape (dim, ...)."""
        if u.shape[0] != self.dim or v.shape[0] != self.dim:
            raise ValueError("algebra-valued fields must have leading dim "
                             f"{self.dim}, got {u.shape} and {v.shape}")
        if self.abelian:
            return np.zeros(np.broadcast_shapes(u.shape, v.shape))
        return np.einsum("kij,i...,j...->k...", self.c, u, v)


def u1():
    """The abelian algebra of the circle action; R with zero bracket."""
    return LieAlgebra("u1", 1, np.zeros((1, 1, 1)))


def so3():
    """so(3) with [e_i, e_j] = eps_ijk e_k (used in unit tests only)."""
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[k, i, j] = 1.0
        c[k, j, i] = -1.0
    return LieAlgebra("so3", 3, c)

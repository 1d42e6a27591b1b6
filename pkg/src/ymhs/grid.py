"""Periodic discretization of the flat 2-torus [0, 2*pi)^2.

Fields are plain float64 ndarrays.  A scalar field has shape (N, N)
with array axis 0 running along x1 and axis 1 along x2 (row-major
sites, components on the leading axes of larger fields).  A one-form
has shape (2, N, N) and a two-form, having a single component
``dx1 ^ dx2`` in two dimensions, is stored as (N, N).

Derivatives are second-order central differences with periodic wrap.
On a periodic grid these are exactly skew-adjoint with respect to the
discrete L2 pairing, which the conservation identities of the flow
drivers rely on; the property is pinned by tests.

All operations are pure and deterministic: reductions run in a fixed
order so that repeated runs agree bit-exactly.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """N x N periodic grid on [0, 2*pi)^2 with spacing h = 2*pi/N."""

    N: int
    h: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 8:
            raise ValueError(f"grid size must be an integer >= 8, got {self.N}")
        object.__setattr__(self, "h", TWO_PI / self.N)

    def axis(self):
        """Coordinate values along one axis."""
        return np.arange(self.N) * self.h

    def mesh(self):
        """Coordinate meshes (x1, x2), each of shape (N, N)."""
        return np.meshgrid(self.axis(), self.axis(), indexing="ij")

    def scalar(self, fill=0.0):
        return np.full((self.N, self.N), fill, dtype=np.float64)

    def oneform(self):
        return np.zeros((2, self.N, self.N), dtype=np.float64)


def _check_attached(grid, f):
    if f.shape[-2:] != (grid.N, grid.N):
        raise ValueError(f"field shape {f.shape} does not match grid N={grid.N}")


def partial_derivative(grid, f, axis):
    """Central difference of a scalar field along torus axis 1 or 2."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    _check_attached(grid, f)
    return kernels.central_diff(f, axis - 1, grid.h)


def l2_inner(grid, u, v):
    """Discrete L2 pairing h^2 * sum over sites and components."""
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    _check_attached(grid, u)
    return grid.h ** 2 * float(np.sum(u * v))


def l2_norm(grid, u):
    return np.sqrt(l2_inner(grid, u, u))


def j_on_oneform(omega):
    """Base complex structure on one-forms: (j w)_1 = w_2, (j w)_2 = -w_1.

    j squares to -Id and g(j w, w) = 0 pointwise, which is the
    skewness behind energy conservation of the connection equation.
    """
    if omega.shape[0] != 2:
        raise ValueError(f"one-form must have 2 components, got {omega.shape}")
    return np.stack((omega[1], -omega[0]))

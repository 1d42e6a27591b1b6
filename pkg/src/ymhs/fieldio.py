"""Binary dump format for grid fields.

One file per component: a 16-byte header (magic ``YMHS``, grid size N
as little-endian int32, component index, form degree) followed by N*N
little-endian float64 values in row-major site order.  The fixed
layout makes dumps bit-stable across runs.

Connection dumps enumerate components as (axis, algebra-coordinate)
pairs, index = axis * dim + coordinate.  Section loaders re-project to
the sphere and reject data whose unit-norm violation exceeds 1e-6.
"""

import struct

import numpy as np

from .matter import project_to_sphere, unit_violation

MAGIC = b"YMHS"
_HEADER = struct.Struct("<4siii")


def component_path(prefix, index):
    return f"{prefix}.c{index}.fld"


def write_component(path, data, component, degree):
    data = np.ascontiguousarray(data, dtype="<f8")
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise ValueError(f"component must be square 2-d, got {data.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, data.shape[0], component, degree))
        fh.write(data.tobytes(order="C"))


def read_component(path):
    with open(path, "rb") as fh:
        magic, n, component, degree = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    return data.astype(np.float64), component, degree


def write_field(prefix, comps, degree):
    """Write a (C, N, N) stack, one file per component."""
    comps = np.asarray(comps)
    if comps.ndim == 2:
        comps = comps[None]
    for k, comp in enumerate(comps):
        write_component(component_path(prefix, k), comp, k, degree)


def read_field(prefix, ncomp):
    comps, degree = [], None
    for k in range(ncomp):
        data, idx, deg = read_component(component_path(prefix, k))
        if idx != k:
            raise ValueError(f"component index mismatch in {prefix}: {idx} != {k}")
        degree = deg if degree is None else degree
        comps.append(data)
    return np.stack(comps), degree


def write_section(prefix, phi):
    write_field(prefix, phi, degree=0)


def read_section(prefix):
    phi, _ = read_field(prefix, 3)
    v = unit_violation(phi)
    if v > 1e-6:
        raise ValueError(f"{prefix}: section violates unit norm by {v:.3e}")
    return project_to_sphere(phi)


def write_connection(prefix, conn, dim=1):
    """Dump connection components as (axis, algebra coordinate) pairs."""
    conn = np.asarray(conn)
    flat = conn.reshape(2 * dim, conn.shape[-2], conn.shape[-1])
    write_field(prefix, flat, degree=1)


def read_connection(prefix, dim=1):
    flat, _ = read_field(prefix, 2 * dim)
    n = flat.shape[-1]
    if dim == 1:
        return flat.reshape(2, n, n)
    return flat.reshape(2, dim, n, n)

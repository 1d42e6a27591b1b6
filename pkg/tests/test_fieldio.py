import struct

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import smooth_oneform
from ymhs import TorusGrid, preset_twist, unit_violation
from ymhs import fieldio


def test_component_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(0)
    data = rng.standard_normal((grid.N, grid.N))
    path = tmp_path / "f.c0.fld"
    fieldio.write_component(path, data, component=3, degree=2)
    back, comp, degree = fieldio.read_component(path)
    assert_allclose(back, data)
    assert comp == 3 and degree == 2


def test_header_layout(tmp_path):
    g = TorusGrid(16)
    path = tmp_path / "h.fld"
    fieldio.write_component(path, np.zeros((16, 16)), component=5, degree=1)
    blob = path.read_bytes()
    magic, n, comp, degree = struct.unpack("<4siii", blob[:16])
    assert magic == b"YMHS"
    assert (n, comp, degree) == (16, 5, 1)
    assert len(blob) == 16 + 8 * 16 * 16
    # payload is little-endian float64, row-major
    assert np.frombuffer(blob[16:], dtype="<f8").shape == (256,)


def test_write_rejects_non_square(tmp_path):
    with pytest.raises(ValueError):
        fieldio.write_component(tmp_path / "x.fld", np.zeros((4, 8)), 0, 0)


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.fld"
    path.write_bytes(b"NOPE" + b"\0" * 12)
    with pytest.raises(ValueError, match="magic"):
        fieldio.read_component(path)


def test_field_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(1)
    w = smooth_oneform(grid, rng)
    fieldio.write_field(tmp_path / "w", w, degree=1)
    back, degree = fieldio.read_field(tmp_path / "w", 2)
    assert_allclose(back, w)
    assert degree == 1


def test_section_roundtrip_reprojects(tmp_path, grid):
    phi, _ = preset_twist(grid)
    fieldio.write_section(tmp_path / "phi", phi)
    back = fieldio.read_section(tmp_path / "phi")
    assert unit_violation(back) <= 1e-12
    assert_allclose(back, phi, atol=1e-12)


def test_section_loader_rejects_bad_norm(tmp_path, grid):
    phi, _ = preset_twist(grid)
    fieldio.write_section(tmp_path / "phi", 1.001 * phi)
    with pytest.raises(ValueError, match="unit norm"):
        fieldio.read_section(tmp_path / "phi")


def test_connection_roundtrip(tmp_path, grid):
    rng = np.random.default_rng(2)
    conn = smooth_oneform(grid, rng)
    fieldio.write_connection(tmp_path / "a", conn)
    assert_allclose(fieldio.read_connection(tmp_path / "a"), conn)
    # components enumerate (axis, algebra coordinate) pairs
    big = rng.standard_normal((2, 3, grid.N, grid.N))
    fieldio.write_connection(tmp_path / "b", big, dim=3)
    assert_allclose(fieldio.read_connection(tmp_path / "b", dim=3), big)
    data, comp, _ = fieldio.read_component(fieldio.component_path(tmp_path / "b", 4))
    assert comp == 4
    assert_allclose(data, big[1, 1])  # index 4 = axis 1 * dim 3 + coord 1


def test_dumps_are_bit_stable(tmp_path, grid):
    phi, _ = preset_twist(grid)
    fieldio.write_section(tmp_path / "p1", phi)
    fieldio.write_section(tmp_path / "p2", phi)
    for k in range(3):
        b1 = (tmp_path / f"p1.c{k}.fld").read_bytes()
        b2 = (tmp_path / f"p2.c{k}.fld").read_bytes()
        assert b1 == b2

"""Shared fixtures: grids, deterministic smooth field builders, JIT warmup."""

import numpy as np
import pytest

from ymhs import TorusGrid, project_to_sphere
from ymhs import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jit kernels once on a tiny grid so that timed tests
    # measure the algorithms, not compilation
    g = TorusGrid(8)
    phi = np.zeros((3, 8, 8))
    phi[2] = 1.0
    a = np.zeros((2, 8, 8))
    kernels.ymh_gradient(phi, a, g.h)
    kernels.cov_deriv_raw(phi, a, g.h)
    kernels.codiff_oneform(a, g.h)
    kernels.grad_scalar(phi[0], g.h)
    kernels.central_diff(phi[0], 0, g.h)


@pytest.fixture
def grid():
    return TorusGrid(64)


def trig_coeffs(rng, modes=3, kmax=1, amp=0.5):
    """Coefficients of a random low-frequency trigonometric polynomial.

    Drawn once, independent of any grid, so the same continuum function
    can be sampled at several resolutions for refinement studies.
    """
    return [(rng.normal(0.0, amp),
             int(rng.integers(-kmax, kmax + 1)),
             int(rng.integers(-kmax, kmax + 1)),
             rng.uniform(0.0, 2.0 * np.pi))
            for _ in range(modes)]


def eval_trig(g, coeffs):
    x1, x2 = g.mesh()
    f = np.zeros((g.N, g.N))
    for a, k1, k2, ph in coeffs:
        f += a * np.cos(k1 * x1 + k2 * x2 + ph)
    return f


def smooth_scalar(g, rng, **kw):
    return eval_trig(g, trig_coeffs(rng, **kw))


def smooth_oneform(g, rng, **kw):
    return np.stack((smooth_scalar(g, rng, **kw), smooth_scalar(g, rng, **kw)))


def smooth_section(g, rng, amp=0.45):
    raw = np.stack([smooth_scalar(g, rng) for _ in range(3)])
    # scale fluctuations so the offset section stays inside the chart
    # of the normalization map for every seed
    raw *= amp / max(1e-9, float(np.max(np.sqrt(np.sum(raw * raw, axis=0)))))
    raw[2] += 1.0
    return project_to_sphere(raw)


def tangent_field(phi, raw):
    return raw - np.sum(raw * phi, axis=0) * phi


def smooth_tangent(g, rng, phi, amp=0.5):
    return tangent_field(phi, np.stack([smooth_scalar(g, rng, amp=amp)
                                        for _ in range(3)]))


def fit_slope(sizes, errors):
    """Least-squares slope of log error against log size."""
    xs = np.log(np.asarray(sizes, dtype=float))
    ys = np.log(np.asarray(errors, dtype=float))
    return float(np.polyfit(xs, ys, 1)[0])

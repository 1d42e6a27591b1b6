"""Acceptance criteria for the flow laboratory.

Each test exercises one acceptance criterion end to end at desk scale
and prints a single pass/fail line with the measured values (run with
``pytest -s`` to see them).  Tolerances are pinned here, not deferred.
"""

import math
import time

import numpy as np
import pytest

from conftest import fit_slope, smooth_oneform, smooth_scalar, smooth_tangent
from ymhs import (Connection, Curvature, FlowConfig, FlowState, TorusGrid,
                  cfl_dt, codifferential, covariant_derivative_vertical,
                  deturck_reconstruct, exterior_derivative, gauge_transform,
                  gradient_pair, integrate, l2_inner, moment_term, preset_twist,
                  project_to_sphere, rhs_viscous, so3, u1, variational_check,
                  vertical_codifferential)
from ymhs.matter import commutator_check
from ymhs.kernels import BACKEND


def report(label, ok, detail):
    print(f"\n[{label}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{label}: {detail}"


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# ------------------------------------------------------------------ #

def test_c1_stationarity_all_systems():
    grid = TorusGrid(64)
    worst = 0.0
    with Timer() as tm:
        for system, eps in (("ymhs", 0.0), ("asf", 0.0),
                            ("viscous", 0.1), ("deturck", 0.1)):
            cfg = FlowConfig(system=system, epsilon=eps, dt=1e-3, t_final=1.0,
                             preset="pole", report_interval=100, k_max=3)
            traj = integrate(grid, cfg)
            assert traj.completed and len(traj.times) == 11
            base = traj.reports[0].values()[1:]
            for rep in traj.reports[1:]:
                worst = max(worst, max(abs(a - b)
                                       for a, b in zip(rep.values()[1:], base)))
    ok = worst <= 1e-12 and tm.elapsed < 10.0
    report("C1 stationarity", ok,
           f"4 systems x 1000 steps, max report deviation {worst:.2e} "
           f"(<=1e-12), runtime {tm.elapsed:.1f} s (<10 s, backend {BACKEND})")


def test_c2_hamiltonian_conservation():
    grid = TorusGrid(64)

    def drift(system, dt):
        cfg = FlowConfig(system=system, epsilon=0.0, dt=dt, t_final=0.1,
                         preset="twist", preset_params={"amplitude": 0.3},
                         report_interval=max(1, round(0.01 / dt)), k_max=0)
        traj = integrate(grid, cfg)
        y0 = traj.reports[0].ymh
        return max(abs(r.ymh - y0) for r in traj.reports) / abs(y0)

    with Timer() as tm:
        drifts_at_target = {s: drift(s, 1e-4) for s in ("ymhs", "asf")}
        ladder = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        orders = {s: fit_slope(ladder, [drift(s, dt) for dt in ladder])
                  for s in ("ymhs", "asf")}
    ok = (all(v <= 1e-6 for v in drifts_at_target.values())
          and all(v >= 3.5 for v in orders.values())
          and tm.elapsed < 120.0)
    report("C2 conservation", ok,
           f"relative drift at dt=1e-4: ymhs {drifts_at_target['ymhs']:.2e}, "
           f"asf {drifts_at_target['asf']:.2e} (<=1e-6); drift order in dt: "
           f"ymhs {orders['ymhs']:.2f}, asf {orders['asf']:.2f} (>=3.5); "
           f"runtime {tm.elapsed:.1f} s (<120 s)")


def test_c3_viscous_dissipation():
    grid = TorusGrid(64)
    with Timer() as tm:
        worst_increase = -math.inf
        pair_errs = []
        for eps in (0.2, 0.1):
            cfg = FlowConfig(system="viscous", epsilon=eps, dt=2e-3, t_final=0.1,
                             preset="twist", report_interval=5, k_max=0)
            traj = integrate(grid, cfg)
            ymh = [r.ymh for r in traj.reports]
            worst_increase = max(worst_increase,
                                 max(b - a for a, b in zip(ymh, ymh[1:])))
            # instantaneous dissipation identity at t = 0
            phi, conn = preset_twist(grid)
            gphi, ga = gradient_pair(grid, phi, conn)
            dphi, dconn = rhs_viscous(grid, phi, conn, eps)
            pairing = l2_inner(grid, gphi, dphi) + l2_inner(grid, ga, dconn)
            target = -eps * (l2_inner(grid, gphi, gphi) + l2_inner(grid, ga, ga))
            pair_errs.append(abs(pairing - target) / abs(target))
    ok = (worst_increase <= 1e-10 and max(pair_errs) <= 1e-8
          and tm.elapsed < 120.0)
    report("C3 dissipation", ok,
           f"worst inter-report increase {worst_increase:.2e} (<=1e-10); "
           f"dissipation pairing rel err {max(pair_errs):.2e} (<=1e-8); "
           f"runtime {tm.elapsed:.1f} s (<120 s)")


def test_c4_variational_consistency():
    grid = TorusGrid(64)
    rng = np.random.default_rng(2024)
    with Timer() as tm:
        phi, conn = preset_twist(grid)
        dphi = smooth_tangent(grid, rng, phi)
        dconn = smooth_oneform(grid, rng)
        rel = variational_check(grid, phi, conn, dphi, dconn, 1e-5).rel_error
        errs = [variational_check(grid, phi, conn, dphi, dconn, s).abs_error
                for s in (1e-3, 5e-4, 2.5e-4)]
        ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = (rel <= 1e-5 and all(3.5 < r < 4.5 for r in ratios)
          and tm.elapsed < 30.0)
    report("C4 variational", ok,
           f"rel error {rel:.2e} at step 1e-5 (<=1e-5); Richardson ratios "
           f"{[f'{r:.2f}' for r in ratios]} (in (3.5,4.5)); "
           f"runtime {tm.elapsed:.1f} s (<30 s)")


def test_c5_deturck_equivalence():
    eps, horizon = 0.1, 0.05
    grids = (32, 64, 128)
    with Timer() as tm:
        residuals, controls = [], []
        for n in grids:
            g = TorusGrid(n)
            dt = 0.5 * g.h ** 2
            common = dict(epsilon=eps, dt=dt, t_final=horizon,
                          report_interval=10 ** 9, k_max=0)
            direct = integrate(g, FlowConfig(system="viscous", **common))
            fixed = integrate(g, FlowConfig(system="deturck", **common))
            residuals.append(deturck_reconstruct(g, fixed, direct)[-1])
            controls.append(deturck_reconstruct(g, fixed, direct,
                                                disable_gauge=True)[-1])
        order = fit_slope([2 * np.pi / n for n in grids], residuals)
        ratio = controls[-1] / residuals[-1]
        decreasing = all(a > b for a, b in zip(residuals, residuals[1:]))
    ok = (order >= 1.8 and decreasing and ratio >= 10.0 and tm.elapsed < 300.0)
    report("C5 deturck", ok,
           f"reconstruction residuals {[f'{r:.2e}' for r in residuals]} "
           f"decreasing, combined order {order:.2f} (>=1.8); negative-control "
           f"ratio {ratio:.0f} (>=10); runtime {tm.elapsed:.1f} s (<300 s)")


def test_c6_gauge_covariance():
    with Timer() as tm:
        errs = []
        for n in (32, 64, 128):
            g = TorusGrid(n)
            x1, x2 = g.mesh()
            theta = 0.4 * np.sin(x1) + 0.3 * np.cos(x2)
            phi0, a0 = preset_twist(g)
            cfg = FlowConfig(system="ymhs", epsilon=0.0, dt=5e-4, t_final=0.02,
                             report_interval=10 ** 9, k_max=0)
            t1 = integrate(g, cfg, FlowState(phi0, a0))
            af, pf = gauge_transform(g, theta, t1.conns[-1], t1.phis[-1])
            at, pt = gauge_transform(g, theta, a0, phi0)
            t2 = integrate(g, cfg, FlowState(project_to_sphere(pt), at))
            errs.append(math.sqrt(
                l2_inner(g, pf - t2.phis[-1], pf - t2.phis[-1])
                + l2_inner(g, af - t2.conns[-1], af - t2.conns[-1])))
        order = fit_slope([2 * np.pi / n for n in (32, 64, 128)], errs)
    ok = order >= 1.8 and tm.elapsed < 180.0
    report("C6 gauge covariance", ok,
           f"transform/flow commutator distances {[f'{e:.2e}' for e in errs]}, "
           f"spatial order {order:.2f} (>=1.8); runtime {tm.elapsed:.1f} s (<180 s)")


def test_c7_operator_certificates():
    with Timer() as tm:
        rng = np.random.default_rng(7)
        grid = TorusGrid(64)
        pairings = []
        # curvature codifferential, abelian and so(3)
        for alg in (u1(), so3()):
            comps = np.stack([smooth_scalar(grid, rng)
                              for _ in range(2 * alg.dim)])
            conn = Connection(grid, alg, comps.reshape(2, alg.dim, grid.N, grid.N))
            curv = Curvature(grid, alg, np.stack(
                [smooth_scalar(grid, rng) for _ in range(alg.dim)]))
            b = np.stack([smooth_scalar(grid, rng) for _ in range(2 * alg.dim)]) \
                .reshape(2, alg.dim, grid.N, grid.N)
            pairings.append(abs(l2_inner(grid, codifferential(conn, curv), b)
                                - l2_inner(grid, curv.f12,
                                           exterior_derivative(conn, b))))
        # vertical codifferential
        raw = np.stack([smooth_scalar(grid, rng) for _ in range(3)])
        raw[2] += 1.6
        phi = project_to_sphere(raw)
        a = 0.5 * np.stack([smooth_scalar(grid, rng), smooth_scalar(grid, rng)])
        w = np.stack([smooth_tangent(grid, rng, phi) for _ in range(2)])
        y = smooth_tangent(grid, rng, phi)
        pairings.append(abs(
            l2_inner(grid, vertical_codifferential(grid, a, phi, w), y)
            - l2_inner(grid, w, covariant_derivative_vertical(grid, a, phi, y))))

        # curvature commutator residual order
        from conftest import trig_coeffs, eval_trig
        cs = [trig_coeffs(rng, amp=0.3) for _ in range(8)]
        errs = []
        for n in (32, 64, 128):
            g = TorusGrid(n)
            raw = np.stack([eval_trig(g, cs[0]), eval_trig(g, cs[1]),
                            1.6 + eval_trig(g, cs[2])])
            p = project_to_sphere(raw)
            av = np.stack([eval_trig(g, cs[3]), eval_trig(g, cs[4])])
            yv = np.stack([eval_trig(g, cs[5]), eval_trig(g, cs[6]),
                           eval_trig(g, cs[7])])
            yv = yv - np.sum(yv * p, axis=0) * p
            errs.append(commutator_check(g, av, p, yv)[1])
        comm_order = fit_slope([2 * np.pi / n for n in (32, 64, 128)], errs)

        # moment-map identity, pointwise
        m = moment_term(phi)
        ambient = 2.0 * phi[2][None] * np.eye(3)[2][:, None, None]
        half_grad = 0.5 * (ambient - np.sum(ambient * phi, axis=0) * phi)
        moment_dev = float(np.max(np.abs(m - half_grad)))
    ok = (max(pairings) <= 1e-12 and comm_order >= 1.9
          and moment_dev <= 1e-12 and tm.elapsed < 30.0)
    report("C7 certificates", ok,
           f"adjointness pairings max {max(pairings):.2e} (<=1e-12); "
           f"commutator order {comm_order:.2f} (>=1.9); moment identity "
           f"{moment_dev:.2e} (<=1e-12); runtime {tm.elapsed:.1f} s (<30 s)")


def test_c8_vanishing_viscosity_probe():
    grid = TorusGrid(64)
    with Timer() as tm:
        dt = cfl_dt(grid, 0.2)  # bound at the most restrictive sweep member
        horizon = 0.05
        ref = integrate(grid, FlowConfig(system="ymhs", epsilon=0.0, dt=dt,
                                         t_final=horizon,
                                         report_interval=10 ** 9, k_max=0))
        dists = []
        for eps in (0.2, 0.1, 0.05, 0.025):
            tr = integrate(grid, FlowConfig(system="viscous", epsilon=eps, dt=dt,
                                            t_final=horizon,
                                            report_interval=10 ** 9, k_max=0))
            dists.append(tr.distance_to(ref, -1))
        decreasing = all(a > b for a, b in zip(dists, dists[1:]))
    ok = decreasing and tm.elapsed < 180.0
    report("C8 vanishing viscosity", ok,
           f"distances to eps=0 at T=0.05: {[f'{d:.3e}' for d in dists]} "
           f"strictly decreasing along eps halvings; "
           f"runtime {tm.elapsed:.1f} s (<180 s)")


def test_c9_derivative_hierarchy_bounded():
    with Timer() as tm:
        worst_gap = 0.0
        for system, eps, preset in (("ymhs", 0.0, "twist"),
                                    ("viscous", 0.1, "twist"),
                                    ("ymhs", 0.0, "pole")):
            cfg = FlowConfig(system=system, epsilon=eps, dt=2e-3, t_final=0.1,
                             preset=preset, report_interval=10, k_max=3)
            traj = integrate(TorusGrid(64), cfg)
            assert traj.completed
            for rep in traj.reports:
                assert all(np.isfinite(v) for v in rep.e)
                worst_gap = max(worst_gap,
                                max(a - b for a, b in zip(rep.e, rep.e[1:])))
    ok = worst_gap <= 0.0 and tm.elapsed < 60.0
    report("C9 derivative hierarchy", ok,
           f"E_0..E_3 finite on all preset runs; worst monotonicity gap "
           f"{worst_gap:.1e} (<=0, exact); runtime {tm.elapsed:.1f} s")

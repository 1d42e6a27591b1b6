"""Reproducible experiment driver.

Subcommands::

    ymhs run <config.json>                 integrate one configured system
    ymhs check <name> [--seed S]           structural certificates
    ymhs convergence <study> <config.json> refinement / sweep studies

Configuration is a single JSON file, echoed into every output header so
results audit themselves.  The environment variable ``YMHS_OUT``
overrides the output directory.  CSV output uses '.' decimals, ','
separators and '#'-prefixed header/footer comment lines; identical
configuration and seed reproduce output byte-identically.

Exit codes: 0 success, 1 invalid configuration or failed check,
2 blow-up mid-run (partial CSV retained, flagged in the footer).
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import energy, fieldio, flows, kernels
from .algebra import so3, u1
from .energy import EnergyReport
from .gauge import Connection, Curvature, codifferential, curvature, exterior_derivative
from .grid import TorusGrid, l2_inner, l2_norm, partial_derivative
from .matter import (commutator_check, covariant_derivative_vertical,
                     project_to_sphere, vertical_codifferential)

# one versioned defaults table for every threshold a subcommand applies;
# overridable through the "thresholds" block of a config file
THRESHOLDS = {
    "version": 1,
    "adjoint_pairing": 1e-12,
    "vertical_pairing": 1e-10,
    "sbp_pairing": 1e-12,
    "variational_rel": 1e-5,
    "variational_ratio_lo": 3.5,
    "variational_ratio_hi": 4.5,
    "commutator_order": 1.9,
    "gauge_curvature": 1e-12,
    "gauge_covariance_order": 1.8,
    "deturck_order": 1.8,
    "deturck_control_ratio": 10.0,
}

CHECK_NAMES = ("variational", "deturck", "commutator", "adjoint", "gauge")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated contents of a run configuration file."""

    N: int = 64
    system: str = "ymhs"
    epsilon: float = 0.0
    dt: float | str = "auto"
    T: float = 0.1
    preset: str = "twist"
    preset_params: dict = field(default_factory=dict)
    report_interval: int = 10
    k_max: int = 3
    seed: int = 1234
    output_dir: str = "out"
    save_fields: bool = False
    thresholds: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def validate(self):
        try:
            grid = TorusGrid(self.N)
            self.flow_config().validate(grid)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        return self

    def flow_config(self):
        return flows.FlowConfig(
            system=self.system, epsilon=self.epsilon, dt=self.dt, t_final=self.T,
            preset=self.preset, preset_params=dict(self.preset_params),
            report_interval=self.report_interval, k_max=self.k_max)

    def grid(self):
        return TorusGrid(self.N)

    def echo(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        return json.dumps(d, sort_keys=True)

    def out_dir(self):
        out = os.environ.get("YMHS_OUT") or self.output_dir
        os.makedirs(out, exist_ok=True)
        return out

    def threshold(self, key):
        return self.thresholds.get(key, THRESHOLDS[key])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def fit_order(sizes, errors):
    """Least-squares slope of log(error) against log(size).

    ``sizes`` are discretization parameters (h, dt, ...); a method of
    order p on errors C * size^p yields a slope close to p.
    """
    xs = [math.log(s) for s in sizes]
    ys = [math.log(max(e, 1e-300)) for e in errors]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) \
        / sum((x - mx) ** 2 for x in xs)


# --------------------------------------------------------------------- #
# run

def cmd_run(cfg):
    grid = cfg.grid()
    fcfg = cfg.flow_config()
    dt = fcfg.resolved_dt(grid)
    traj = flows.integrate(grid, fcfg)
    out = cfg.out_dir()
    path = os.path.join(out, "energy.csv")
    with open(path, "w") as fh:
        fh.write("# ymhs-run v1\n")
        fh.write(f"# config: {cfg.echo()}\n")
        fh.write(f"# backend: {kernels.BACKEND}\n")
        fh.write(f"# dt: {_fmt(dt)}\n")
        fh.write(",".join(EnergyReport.columns(cfg.k_max)) + "\n")
        for rep in traj.reports:
            fh.write(",".join(_fmt(v) for v in rep.values()) + "\n")
        if traj.completed:
            fh.write("# status: complete\n")
        else:
            fh.write(f"# status: incomplete blow-up t={_fmt(traj.blowup_time)}\n")
    if cfg.save_fields and traj.phis:
        fieldio.write_section(os.path.join(out, "final_phi"), traj.phis[-1])
        fieldio.write_connection(os.path.join(out, "final_conn"), traj.conns[-1])
        if traj.thetas is not None:
            fieldio.write_field(os.path.join(out, "final_theta"),
                                traj.thetas[-1], degree=0)
    print(f"run: {cfg.system} N={cfg.N} dt={_fmt(dt)} reports={len(traj.reports)} "
          f"-> {path}")
    if not traj.completed:
        print(f"run: blow-up at t={_fmt(traj.blowup_time)}; partial series retained")
        return 2
    return 0


# --------------------------------------------------------------------- #
# checks

@dataclass
class CheckLine:
    name: str
    measured: float
    threshold: float
    op: str  # "<=" or ">=" or "in"
    passed: bool

    def render(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.name}: measured={_fmt(float(self.measured))} "
                f"threshold{self.op}{_fmt(self.threshold)} {status}")


def _line(name, measured, threshold, op):
    ok = measured <= threshold if op == "<=" else measured >= threshold
    return CheckLine(name, measured, threshold, op, ok)


def _smooth_fields(grid, rng, ncomp):
    """Random low-frequency trigonometric fields, shape (ncomp, N, N)."""
    x1, x2 = grid.mesh()
    out = np.zeros((ncomp, grid.N, grid.N))
    for c in range(ncomp):
        for _ in range(3):
            k1, k2 = rng.integers(-2, 3, size=2)
            amp, ph = rng.normal(0, 0.5), rng.uniform(0, 2 * np.pi)
            out[c] += amp * np.cos(k1 * x1 + k2 * x2 + ph)
    return out


def _random_section(grid, rng, amplitude=0.4):
    raw = amplitude * _smooth_fields(grid, rng, 3)
    raw[2] += 1.5
    return project_to_sphere(raw)


def _tangent(phi, raw):
    return raw - np.sum(raw * phi, axis=0) * phi


def check_adjoint(cfg):
    grid = TorusGrid(48)
    rng = np.random.default_rng(cfg.seed)
    lines = []
    # summation by parts of the central difference
    f = _smooth_fields(grid, rng, 1)[0]
    gfd = _smooth_fields(grid, rng, 1)[0]
    worst = max(abs(l2_inner(grid, partial_derivative(grid, f, ax), gfd)
                    + l2_inner(grid, f, partial_derivative(grid, gfd, ax)))
                for ax in (1, 2))
    lines.append(_line("adjoint.summation_by_parts", worst,
                       cfg.threshold("sbp_pairing"), "<="))
    # codifferential pairing, abelian and so(3)
    for alg in (u1(), so3()):
        conn = Connection(grid, alg, _smooth_fields(grid, rng, 2 * alg.dim)
                          .reshape(2, alg.dim, grid.N, grid.N))
        curv = Curvature(grid, alg, _smooth_fields(grid, rng, alg.dim))
        b = _smooth_fields(grid, rng, 2 * alg.dim).reshape(2, alg.dim, grid.N, grid.N)
        resid = abs(l2_inner(grid, codifferential(conn, curv), b)
                    - l2_inner(grid, curv.f12, exterior_derivative(conn, b)))
        lines.append(_line(f"adjoint.codifferential_{alg.name}", resid,
                           cfg.threshold("adjoint_pairing"), "<="))
    # vertical codifferential pairing
    phi = _random_section(grid, rng)
    a = 0.4 * _smooth_fields(grid, rng, 2)
    w = np.stack([_tangent(phi, _smooth_fields(grid, rng, 3)) for _ in range(2)])
    y = _tangent(phi, _smooth_fields(grid, rng, 3))
    lhs = l2_inner(grid, vertical_codifferential(grid, a, phi, w), y)
    dy = covariant_derivative_vertical(grid, a, phi, y)
    rhs = l2_inner(grid, w, dy)
    lines.append(_line("adjoint.vertical_codifferential", abs(lhs - rhs),
                       cfg.threshold("vertical_pairing"), "<="))
    return lines


def check_variational(cfg):
    grid = TorusGrid(48)
    rng = np.random.default_rng(cfg.seed)
    phi, conn = flows.preset_twist(grid)
    dphi = _tangent(phi, _smooth_fields(grid, rng, 3))
    dconn = _smooth_fields(grid, rng, 2)
    res = energy.variational_check(grid, phi, conn, dphi, dconn, 1e-5)
    lines = [_line("variational.rel_error", res.rel_error,
                   cfg.threshold("variational_rel"), "<=")]
    errs = [energy.variational_check(grid, phi, conn, dphi, dconn, s).abs_error
            for s in (1e-3, 5e-4, 2.5e-4)]
    for k in range(len(errs) - 1):
        ratio = errs[k] / errs[k + 1] if errs[k + 1] > 0 else float("inf")
        lines.append(_line(f"variational.richardson_ratio_{k}_lo", ratio,
                           cfg.threshold("variational_ratio_lo"), ">="))
        lines.append(_line(f"variational.richardson_ratio_{k}_hi", ratio,
                           cfg.threshold("variational_ratio_hi"), "<="))
    return lines


def check_commutator(cfg):
    rng = np.random.default_rng(cfg.seed)
    # one fixed smooth fixture evaluated on each grid; frequencies are
    # kept at |k| <= 1 so the coarsest grid already sits in the
    # asymptotic convergence regime
    coeffs = rng.normal(0, 0.3, size=(8, 3))
    ks = rng.integers(-1, 2, size=(8, 2))

    def fields(grid):
        x1, x2 = grid.mesh()
        raw = np.zeros((3, grid.N, grid.N))
        a = np.zeros((2, grid.N, grid.N))
        yraw = np.zeros((3, grid.N, grid.N))
        for m in range(8):
            wave = np.cos(ks[m, 0] * x1 + ks[m, 1] * x2 + m)
            raw[m % 3] += coeffs[m, 0] * wave
            a[m % 2] += coeffs[m, 1] * wave
            yraw[(m + 1) % 3] += coeffs[m, 2] * wave
        raw[2] += 1.6
        phi = project_to_sphere(raw)
        return phi, 0.5 * a, _tangent(phi, yraw)

    errs = []
    for n in (32, 64, 128):
        grid = TorusGrid(n)
        phi, a, y = fields(grid)
        errs.append(commutator_check(grid, a, phi, y)[1])
    order = fit_order([2 * np.pi / n for n in (32, 64, 128)], errs)
    return [_line("commutator.residual_order", order,
                  cfg.threshold("commutator_order"), ">=")]


def check_gauge(cfg):
    rng = np.random.default_rng(cfg.seed)
    lines = []
    grid = TorusGrid(48)
    theta = _smooth_fields(grid, rng, 1)[0]
    phi, conn = flows.preset_twist(grid)
    conn_t, phi_t = flows.gauge_transform(grid, theta, conn, phi)
    alg = u1()
    f0 = curvature(Connection(grid, alg, conn[:, None])).f12
    f1 = curvature(Connection(grid, alg, conn_t[:, None])).f12
    lines.append(_line("gauge.curvature_invariance", float(np.max(np.abs(f1 - f0))),
                       cfg.threshold("gauge_curvature"), "<="))
    # time-independent transform commutes with the conservative flow to O(h^2)
    errs = []
    for n in (32, 64, 128):
        g = TorusGrid(n)
        x1, x2 = g.mesh()
        th = 0.4 * np.sin(x1) + 0.3 * np.cos(x2)
        p0, a0 = flows.preset_twist(g)
        fcfg = flows.FlowConfig(system="ymhs", epsilon=0.0, dt=5e-4,
                                t_final=0.02, report_interval=10 ** 9, k_max=0)
        t1 = flows.integrate(g, fcfg, flows.FlowState(p0, a0))
        af, pf = flows.gauge_transform(g, th, t1.conns[-1], t1.phis[-1])
        at, pt = flows.gauge_transform(g, th, a0, p0)
        t2 = flows.integrate(g, fcfg, flows.FlowState(pt, at))
        errs.append(math.sqrt(
            l2_inner(g, pf - t2.phis[-1], pf - t2.phis[-1])
            + l2_inner(g, af - t2.conns[-1], af - t2.conns[-1])))
    order = fit_order([2 * np.pi / n for n in (32, 64, 128)], errs)
    lines.append(_line("gauge.covariance_order", order,
                       cfg.threshold("gauge_covariance_order"), ">="))
    return lines


def check_deturck(cfg):
    eps, horizon = 0.1, 0.05
    grids = (32, 64, 128)
    errs, controls = [], []
    for n in grids:
        g = TorusGrid(n)
        dt = 0.5 * g.h ** 2
        common = dict(epsilon=eps, dt=dt, t_final=horizon,
                      report_interval=10 ** 9, k_max=0)
        direct = flows.integrate(g, flows.FlowConfig(system="viscous", **common))
        fixed = flows.integrate(g, flows.FlowConfig(system="deturck", **common))
        errs.append(flows.deturck_reconstruct(g, fixed, direct)[-1])
        controls.append(flows.deturck_reconstruct(g, fixed, direct,
                                                  disable_gauge=True)[-1])
    order = fit_order([2 * np.pi / n for n in grids], errs)
    ratio = controls[-1] / errs[-1]
    return [
        _line("deturck.reconstruction_order", order,
              cfg.threshold("deturck_order"), ">="),
        _line("deturck.negative_control_ratio", ratio,
              cfg.threshold("deturck_control_ratio"), ">="),
    ]


CHECKS = {
    "adjoint": check_adjoint,
    "variational": check_variational,
    "commutator": check_commutator,
    "gauge": check_gauge,
    "deturck": check_deturck,
}


def cmd_check(cfg, name):
    if name not in CHECKS:
        raise ConfigError(f"unknown check {name!r} (have {sorted(CHECKS)})")
    print("# ymhs-check v1")
    print(f"# thresholds: {json.dumps({**THRESHOLDS, **cfg.thresholds}, sort_keys=True)}")
    print(f"# seed: {cfg.seed}")
    lines = CHECKS[name](cfg)
    ok = True
    for line in lines:
        print(line.render())
        ok = ok and line.passed
    print(f"# result: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# --------------------------------------------------------------------- #
# convergence studies

def _write_study(cfg, study, rows, footer_lines):
    out = cfg.out_dir()
    path = os.path.join(out, f"convergence_{study}.csv")
    with open(path, "w") as fh:
        fh.write("# ymhs-convergence v1\n")
        fh.write(f"# study: {study}\n")
        fh.write(f"# config: {cfg.echo()}\n")
        fh.write(rows[0] + "\n")
        for row in rows[1:]:
            fh.write(row + "\n")
        for line in footer_lines:
            fh.write(f"# {line}\n")
    for line in footer_lines:
        print(line)
    print(f"convergence: wrote {path}")
    return path


def study_space(cfg):
    """Curvature operator error against the analytic field strength."""
    rows = ["N,error"]
    errs, sizes = [], []
    for n in (32, 64, 128):
        g = TorusGrid(n)
        x1, _ = g.mesh()
        conn = np.stack((np.zeros_like(x1), np.sin(x1)))
        f = curvature(Connection(g, u1(), conn[:, None])).f12[0]
        err = l2_norm(g, f - np.cos(x1))
        errs.append(err)
        sizes.append(g.h)
        rows.append(f"{n},{_fmt(err)}")
    order = fit_order(sizes, errs)
    return rows, [f"fitted_order: {_fmt(order)}"], 0


def study_time(cfg):
    """Energy drift of the conservative system under dt halvings."""
    g = cfg.grid()
    base_dt = 4e-3 if cfg.dt == "auto" else float(cfg.dt)
    rows = ["dt,drift"]
    drifts, dts = [], []
    for k in range(4):
        dt = base_dt / 2 ** k
        fcfg = flows.FlowConfig(system="ymhs", epsilon=0.0, dt=dt, t_final=cfg.T,
                                preset=cfg.preset, preset_params=cfg.preset_params,
                                report_interval=10 ** 9, k_max=0)
        tr = flows.integrate(g, fcfg)
        y0 = tr.reports[0].ymh
        drift = max(abs(r.ymh - y0) for r in tr.reports) / abs(y0)
        drifts.append(drift)
        dts.append(dt)
        rows.append(f"{_fmt(dt)},{_fmt(drift)}")
    order = fit_order(dts, drifts)
    return rows, [f"fitted_order: {_fmt(order)}"], 0


def study_epsilon(cfg):
    """Distance to the eps = 0 solution under eps halvings (ordering only)."""
    g = cfg.grid()
    base_eps = cfg.epsilon if cfg.epsilon > 0 else 0.2
    dt = flows.cfl_dt(g, base_eps)
    horizon = cfg.T
    ref = flows.integrate(g, flows.FlowConfig(
        system="ymhs", epsilon=0.0, dt=dt, t_final=horizon, preset=cfg.preset,
        preset_params=cfg.preset_params, report_interval=10 ** 9, k_max=0))
    rows = ["epsilon,distance"]
    dists = []
    for k in range(4):
        eps = base_eps / 2 ** k
        tr = flows.integrate(g, flows.FlowConfig(
            system="viscous", epsilon=eps, dt=dt, t_final=horizon, preset=cfg.preset,
            preset_params=cfg.preset_params, report_interval=10 ** 9, k_max=0))
        d = tr.distance_to(ref, -1)
        dists.append(d)
        rows.append(f"{_fmt(eps)},{_fmt(d)}")
    mono = all(a > b for a, b in zip(dists, dists[1:]))
    return rows, [f"monotone_decreasing: {str(mono).lower()}"], 0 if mono else 1


STUDIES = {"space": study_space, "time": study_time, "epsilon": study_epsilon}


def cmd_convergence(cfg, study):
    if study not in STUDIES:
        raise ConfigError(f"unknown study {study!r} (have {sorted(STUDIES)})")
    rows, footer, code = STUDIES[study](cfg)
    _write_study(cfg, study, rows, footer)
    return code


# --------------------------------------------------------------------- #

def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ymhs",
        description="Flow runs, structural checks and convergence studies "
                    "on the flat 2-torus.")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="integrate one configured system")
    p_run.add_argument("config")
    p_check = sub.add_parser("check", help="run a structural certificate")
    p_check.add_argument("name", help=f"one of {', '.join(sorted(CHECKS))}")
    p_check.add_argument("--seed", type=int, default=None)
    p_check.add_argument("--config", default=None)
    p_conv = sub.add_parser("convergence", help="refinement or sweep study")
    p_conv.add_argument("study", help=f"one of {', '.join(sorted(STUDIES))}")
    p_conv.add_argument("config")
    args = parser.parse_args(argv)

    try:
        if args.cmd == "run":
            return cmd_run(RunConfig.from_file(args.config))
        if args.cmd == "check":
            cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
            if args.seed is not None:
                cfg.seed = args.seed
            return cmd_check(cfg, args.name)
        if args.cmd == "convergence":
            return cmd_convergence(RunConfig.from_file(args.config), args.study)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())

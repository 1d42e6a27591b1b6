"""Right-hand sides and time integration for the four flow systems.

Systems, all on the torus with the u(1)/sphere matter model:

* ``ymhs``     coupled Hamiltonian flow: J(phi) d_t phi = gphi,
               j d_t A = ga, solved for the time derivatives through
               J^2 = -Id and j^2 = -Id,
* ``asf``      the same phi-equation with the connection frozen,
* ``viscous``  (eps Id + J) / (eps Id + j) in place of J / j, which
               turns the skew system into a dissipative one,
* ``deturck``  the gauge-fixed parabolic form of the viscous system
               together with the accumulated gauge angle that undoes
               the fixing.

Here (gphi, ga) is the driving gradient pair assembled by the kernel
backend; it is the exact discrete gradient of half the monitored
energy functional, which is what makes conservation at eps = 0 and the
dissipation identity at eps > 0 exact in semi-discrete time.  Time
stepping is classical RK4 with sitewise renormalization of the section
after each combined step.

A trajectory is advanced by exactly one driver and all reductions are
deterministic, so identical configurations reproduce bit-identically.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import energy, kernels
from .gauge import gauge_transform
from .grid import TorusGrid, l2_inner
from .matter import BlowUpError, killing_field, project_to_sphere, unit_violation

SYSTEMS = ("ymhs", "asf", "viscous", "deturck")

# safety factor of the explicit stability bound; see cfl_dt
CFL_SAFETY = 0.2


def cfl_dt(grid, eps):
    """Step bound 0.2 h^2 / max(eps, h^2) enforced for the dissipative systems."""
    return CFL_SAFETY * grid.h ** 2 / max(eps, grid.h ** 2)


# --------------------------------------------------------------------- #
# initial data

def preset_pole(grid):
    """Constant section at the fixed point of the circle action; A = 0."""
    phi = np.zeros((3, grid.N, grid.N))
    phi[2] = 1.0
    return phi, np.zeros((2, grid.N, grid.N))


def preset_twist(grid, amplitude=0.3):
    """Smooth near-pole data with every term of every equation active."""
    a = float(amplitude)
    x1, x2 = grid.mesh()
    raw = np.stack((a * np.sin(x1), a * np.sin(x2), 1.0 + a * np.cos(x1 + x2)))
    phi = project_to_sphere(raw)
    conn = np.stack((a * np.sin(x2), a * np.sin(x1)))
    return phi, conn


PRESETS = {"pole": preset_pole, "twist": preset_twist}


def make_preset(grid, name, params=None):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r} (have {sorted(PRESETS)})")
    return PRESETS[name](grid, **(params or {}))


# --------------------------------------------------------------------- #
# states and configuration

@dataclass
class FlowState:
    """Section/connection pair at time t."""

    phi: np.ndarray
    conn: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.phi.shape[0] != 3 or self.conn.shape[0] != 2 \
                or self.phi.shape[1:] != self.conn.shape[1:]:
            raise ValueError(f"bad state shapes {self.phi.shape}, {self.conn.shape}")
        v = unit_violation(self.phi)
        if v > 1e-12:
            raise ValueError(f"section is not unit-norm (violation {v:.3e})")


@dataclass
class DeTurckState:
    """Gauge-fixed state: section psi, difference form b = B - A0, angle theta."""

    psi: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    t: float = 0.0


@dataclass
class FlowConfig:
    """Parameters of one integration run."""

    system: str = "ymhs"
    epsilon: float = 0.0
    dt: float | str = "auto"
    t_final: float = 0.1
    preset: str = "twist"
    preset_params: dict = field(default_factory=dict)
    report_interval: int = 10
    k_max: int = 3

    def resolved_dt(self, grid):
        if self.dt == "auto":
            return cfl_dt(grid, self.epsilon)
        return float(self.dt)

    def validate(self, grid):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r} (have {SYSTEMS})")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.system in ("ymhs", "asf") and self.epsilon != 0.0:
            raise ValueError(f"system {self.system!r} requires epsilon = 0")
        if self.system in ("viscous", "deturck") and self.epsilon == 0.0:
            raise ValueError(f"system {self.system!r} requires epsilon > 0")
        if self.t_final <= 0:
            raise ValueError("t_final must be > 0")
        dt = self.resolved_dt(grid)
        if dt <= 0:
            raise ValueError("dt must be > 0")
        if dt > self.t_final * (1 + 1e-12):
            raise ValueError("dt must not exceed t_final")
        if self.system in ("viscous", "deturck"):
            bound = cfl_dt(grid, self.epsilon)
            if dt > bound * (1 + 1e-12):
                raise ValueError(
                    f"dt={dt:g} exceeds the stability bound {bound:g} "
                    f"(0.2 h^2 / max(eps, h^2))")
        if not isinstance(self.report_interval, int) or self.report_interval < 1:
            raise ValueError("report_interval must be a positive integer")
        if not 0 <= self.k_max <= 3:
            raise ValueError("k_max must be between 0 and 3")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        return dt


# --------------------------------------------------------------------- #
# right-hand sides

def gradient_pair(grid, phi, conn):
    """Driving pair (gphi, ga); half the gradient of the energy functional."""
    return kernels.ymh_gradient(phi, conn, grid.h)


def _minus_j_inv_apply(eps, gphi, ga, phi):
    # d_t phi = -(eps Id + J(phi)) gphi,  d_t A = -(eps Id + j) ga
    jphi = kernels.cross(phi, gphi)
    ja = np.stack((ga[1], -ga[0]))
    if eps == 0.0:
        return -jphi, -ja
    return -eps * gphi - jphi, -eps * ga - ja


def rhs_viscous(grid, phi, conn, eps):
    """Dissipative regularization; at eps = 0 this is the Hamiltonian flow.

    Non-finite values (the blow-up signal) are detected by the driver
    after each combined step, together with the projection guard.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    gphi, ga = gradient_pair(grid, phi, conn)
    return _minus_j_inv_apply(eps, gphi, ga, phi)


def rhs_ymhs(grid, phi, conn):
    """Hamiltonian flow of the energy functional (skew coupling, eps = 0)."""
    return rhs_viscous(grid, phi, conn, 0.0)


def rhs_asf(grid, phi, conn_fixed):
    """phi-equation alone, with a frozen connection."""
    return rhs_ymhs(grid, phi, conn_fixed)[0]


def rhs_deturck(grid, psi, b, a0, eps):
    """Gauge-fixed parabolic system for (psi, b) with B = A0 + b.

    The scalar D_B* b acts on the section through the infinitesimal
    fiber action, i.e. as (eps D_B* b) X(psi).
    """
    if eps <= 0:
        raise ValueError("the gauge-fixed system requires eps > 0 "
                         "(its extra terms vanish identically at eps = 0)")
    conn = a0 + b
    gpsi, gconn = gradient_pair(grid, psi, conn)
    dpsi, dconn = _minus_j_inv_apply(eps, gpsi, gconn, psi)
    s = kernels.codiff_oneform(b, grid.h)
    dpsi += (eps * s) * killing_field(psi)
    dconn -= eps * kernels.grad_scalar(s, grid.h)
    return dpsi, dconn


def gauge_rate(grid, b, eps):
    """Angle velocity of the undoing gauge family: d theta/dt = -eps D_B* b."""
    return -eps * kernels.codiff_oneform(b, grid.h)


def gauge_ode_step(grid, theta, b, eps, dt):
    """Advance the gauge angle over one step with the one-form frozen.

    With b frozen all four RK4 stages see the same rate, so the
    combined update collapses to a single increment.  The coupled
    driver integrates theta through the full stage structure instead,
    keeping it synchronized with (psi, b).
    """
    return theta + dt * gauge_rate(grid, b, eps)


# --------------------------------------------------------------------- #
# time stepping

def step_rk4(state, rhs, dt, sphere_slot=0):
    """One classical RK4 step on a tuple of arrays.

    ``rhs(state) -> tuple of derivatives``.  When ``sphere_slot`` is
    not None that component is renormalized to the unit sphere after
    the stage combination; a collapse there raises BlowUpError and the
    caller keeps the last valid state.
    """
    def stage(ks, c):
        parts = []
        for y, k in zip(state, ks):
            p = k * c
            p += y
            parts.append(p)
        return tuple(parts)

    k1 = rhs(state)
    k2 = rhs(stage(k1, 0.5 * dt))
    k3 = rhs(stage(k2, 0.5 * dt))
    k4 = rhs(stage(k3, dt))
    out = []
    for y, a, b, c, d in zip(state, k1, k2, k3, k4):
        acc = b + c
        acc *= 2.0
        acc += a
        acc += d
        acc *= dt / 6.0
        acc += y
        out.append(acc)
    out = tuple(out)
    if sphere_slot is not None:
        out = (*out[:sphere_slot], project_to_sphere(out[sphere_slot]),
               *out[sphere_slot + 1:])
    return out


# --------------------------------------------------------------------- #
# trajectories

@dataclass
class Trajectory:
    """Report-time snapshots and monitored series of one run."""

    grid: TorusGrid
    config: FlowConfig
    dt: float
    times: list
    phis: list
    conns: list
    reports: list
    thetas: list | None = None
    completed: bool = True
    blowup_time: float | None = None

    def distance_to(self, other, k):
        """L2 distance between states at report index k."""
        dphi = self.phis[k] - other.phis[k]
        dconn = self.conns[k] - other.conns[k]
        return math.sqrt(l2_inner(self.grid, dphi, dphi)
                         + l2_inner(self.grid, dconn, dconn))

    def state(self, k):
        """Snapshot at report index k as a typed state."""
        if self.thetas is not None:
            return DeTurckState(psi=self.phis[k],
                                b=self.conns[k] - self.conns[0],
                                theta=self.thetas[k], t=self.times[k])
        return FlowState(self.phis[k], self.conns[k], self.times[k])


def _report_times(n_steps, interval):
    marks = set(range(0, n_steps + 1, interval))
    marks.add(n_steps)
    return marks


def integrate(grid, config, initial=None):
    """Fixed-step march of the configured system to t_final.

    Returns a Trajectory with energy reports and state snapshots every
    ``report_interval`` steps (plus the final step).  A blow-up aborts
    the march; the partial trajectory is returned flagged incomplete.
    """
    dt = config.validate(grid)
    if initial is None:
        phi, conn = make_preset(grid, config.preset, config.preset_params)
    else:
        phi, conn = initial.phi.copy(), initial.conn.copy()
    n_steps = max(1, int(round(config.t_final / dt)))
    if abs(n_steps * dt - config.t_final) > 1e-9 * max(1.0, config.t_final):
        n_steps = int(math.ceil(config.t_final / dt - 1e-12))
    marks = _report_times(n_steps, config.report_interval)

    if config.system == "deturck":
        return _integrate_deturck(grid, config, dt, n_steps, marks, phi, conn)

    eps = config.epsilon
    if config.system == "asf":
        def rhs(state):
            return (rhs_asf(grid, state[0], conn),)
    else:
        def rhs(state):
            return rhs_viscous(grid, state[0], state[1], eps)

    traj = Trajectory(grid, config, dt, [], [], [], [])

    def snap(t, phi, conn):
        traj.times.append(t)
        traj.phis.append(phi.copy())
        traj.conns.append(conn.copy())
        traj.reports.append(energy.make_report(grid, phi, conn, t, config.k_max))

    snap(0.0, phi, conn)
    state = (phi,) if config.system == "asf" else (phi, conn)
    t = 0.0
    # overflow is the blow-up signal, handled explicitly below
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            step_dt = min(dt, config.t_final - t)
            try:
                state = step_rk4(state, rhs, step_dt)
            except BlowUpError:
                traj.completed = False
                traj.blowup_time = t
                return traj
            t += step_dt
            if not np.all(np.isfinite(state[0])):
                traj.completed = False
                traj.blowup_time = t
                return traj
            if step in marks:
                cur_conn = conn if config.system == "asf" else state[1]
                snap(t, state[0], cur_conn)
    return traj


def _integrate_deturck(grid, config, dt, n_steps, marks, phi0, a0):
    eps = config.epsilon
    a0 = a0.copy()

    def rhs(state):
        psi, b, theta = state
        dpsi, db = rhs_deturck(grid, psi, b, a0, eps)
        return dpsi, db, gauge_rate(grid, b, eps)

    traj = Trajectory(grid, config, dt, [], [], [], [], thetas=[])

    def snap(t, psi, b, theta):
        traj.times.append(t)
        traj.phis.append(psi.copy())
        traj.conns.append(a0 + b)
        traj.thetas.append(theta.copy())
        traj.reports.append(energy.make_report(grid, psi, a0 + b, t, config.k_max))

    state = (phi0, np.zeros_like(a0), np.zeros((grid.N, grid.N)))
    snap(0.0, *state)
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            step_dt = min(dt, config.t_final - t)
            try:
                state = step_rk4(state, rhs, step_dt)
            except BlowUpError:
                traj.completed = False
                traj.blowup_time = t
                return traj
            t += step_dt
            if not np.all(np.isfinite(state[0])):
                traj.completed = False
                traj.blowup_time = t
                return traj
            if step in marks:
                snap(t, *state)
    return traj


def deturck_reconstruct(grid, fixed_traj, direct_traj, disable_gauge=False):
    """Undo the gauge fixing and compare against the direct dissipative run.

    Pulls every snapshot (psi, B) back through the accumulated angle
    and returns the per-report-time L2 distances to the direct
    trajectory.  ``disable_gauge`` freezes the angle at zero (negative
    control: the residual then does not vanish under refinement).
    """
    cf, cd = fixed_traj.config, direct_traj.config
    if cf.system != "deturck" or cd.system != "viscous":
        raise ValueError("need a gauge-fixed trajectory and a direct viscous one")
    if (cf.epsilon != cd.epsilon or fixed_traj.dt != direct_traj.dt
            or cf.preset != cd.preset or cf.preset_params != cd.preset_params
            or fixed_traj.grid.N != direct_traj.grid.N
            or len(fixed_traj.times) != len(direct_traj.times)):
        raise ValueError("trajectories were not produced by matching configurations")
    residuals = []
    for k, t in enumerate(fixed_traj.times):
        if abs(t - direct_traj.times[k]) > 1e-12 * max(1.0, t):
            raise ValueError("report times do not line up")
        theta = np.zeros((grid.N, grid.N)) if disable_gauge else fixed_traj.thetas[k]
        a_rec, phi_rec = gauge_transform(grid, theta, fixed_traj.conns[k],
                                         fixed_traj.phis[k])
        dphi = phi_rec - direct_traj.phis[k]
        dconn = a_rec - direct_traj.conns[k]
        residuals.append(math.sqrt(l2_inner(grid, dphi, dphi)
                                   + l2_inner(grid, dconn, dconn)))
    return residuals

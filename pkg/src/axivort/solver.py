r"""Explicit time integration of the swirl-free axisymmetric vorticity equation.

Physical variables::

    d_t w + div_*(u w) = d_rr w + (1/r) d_r w + d_zz w - w / r^2,   u = BS[w].

Self-similar variables, ``T = t + 1``, ``s = ln T``, ``w = T^-2 W(r/sqrt T, z/sqrt T)``
and ``u = T^-3/2 U`` with ``U = BS[W]``::

    d_s W = L W + (1/2) div_*(x W) + W - exp(-s) div_*(U W).

In the second form the Gaussian profile ``I0 G1`` is a stationary point of the
linear part, and a fixed grid in ``(xi, eta)`` follows the spreading of the
solution, so long runs need far fewer steps.

Discretisation, both modes: cell-centred grid, 5-point Laplacian with the
``(1/r) d_r`` and ``-1/r^2`` terms, odd ghost value across the axis,
zero ghost values at the outer edges, finite-volume transport with face
fluxes equal to the average of the neighbouring cell products and no flux
through the axis or the outer edges, and the two-stage midpoint rule in
time.  The Biot-Savart velocity is refreshed at each stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .biot_savart import velocity_from_vorticity
from .grid_fields import (
    Grid,
    ScalarField,
    VectorField,
    WeightSpec,
    moment_I,
    moment_J,
    read_snapshot,
    weighted_lp_norm,
)
from .semigroup import gaussian_term

__all__ = [
    "StabilityError",
    "InitialData",
    "SimConfig",
    "SimState",
    "MomentRecord",
    "RunResult",
    "RECORD_COLUMNS",
    "axisymmetric_laplacian",
    "flux_divergence",
    "stability_limit",
    "initial_state",
    "step",
    "self_similar_step",
    "jdot",
    "moment_record",
    "run",
]


class StabilityError(RuntimeError):
    """Raised when a step is requested above the stability limit or the state blows up."""


# --- configuration ------------------------------------------------------------

_INIT_KINDS = ("gaussian_ring", "shifted_ring", "dipole", "zero", "from_file")


@dataclass(frozen=True)
class InitialData:
    """Initial vorticity.

    ``gaussian_ring``: ``A r exp(-((r-r0)^2 + (z-z0)^2) / w^2)``.
    ``shifted_ring`` is the same formula, meant for ``z0 != 0`` (the default
    then becomes ``z0 = 1``).  ``dipole`` multiplies the ring by
    ``(z - z0)/w`` and so has zero impulse.  ``zero`` is the null field and
    ``from_file`` reads a snapshot whose grid must match the run grid.
    """

    kind: str = "gaussian_ring"
    amplitude: float = 1.0
    r0: float = 1.0
    z0: float | None = None
    width: float = 1.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in _INIT_KINDS:
            raise ValueError(f"init.kind must be one of {_INIT_KINDS}, got {self.kind!r}")
        if not self.r0 > 0:
            raise ValueError("init.r0 must be positive")
        if not self.width > 0:
            raise ValueError("init.width must be positive")
        if self.kind == "from_file" and not self.path:
            raise ValueError("init.path is required for kind = from_file")

    @property
    def center_z(self) -> float:
        if self.z0 is not None:
            return float(self.z0)
        return 1.0 if self.kind == "shifted_ring" else 0.0

    def sample(self, grid: Grid, time: float = 0.0) -> ScalarField:
        if self.kind == "from_file":
            f = read_snapshot(self.path)
            if f.grid != grid:
                raise ValueError(f"snapshot grid {f.grid} does not match the run grid {grid}")
            return ScalarField(grid, f.values, time)
        R, Z = grid.mesh()
        if self.kind == "zero":
            return ScalarField(grid, np.zeros(grid.shape), time)
        z0 = self.center_z
        w2 = self.width**2
        vals = self.amplitude * R * np.exp(-((R - self.r0) ** 2 + (Z - z0) ** 2) / w2)
        if self.kind == "dipole":
            vals = vals * (Z - z0) / self.width
        return ScalarField(grid, vals, time)


_MODES = ("physical", "self_similar")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one run."""

    grid: Grid = Grid(128, 256, 16.0, 16.0)
    t0: float = 0.0
    t_end: float = 50.0
    cfl: float = 0.4
    diffusion_safety: float = 0.4
    mode: str = "self_similar"
    linear_only: bool = False
    init: InitialData = InitialData()
    output_every: float = 2.5
    refresh: str = "stage"

    def __post_init__(self):
        if not (self.t0 >= 0 and self.t_end > self.t0):
            raise ValueError("need t_end > t0 >= 0")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl ∈ (0,1] violated: cfl must lie in (0, 1]")
        if not 0 < self.diffusion_safety <= 0.5:
            raise ValueError("diffusion_safety must lie in (0, 0.5]")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if not self.output_every > 0:
            raise ValueError("output_every must be positive")
        if self.refresh not in ("stage", "step"):
            raise ValueError("refresh must be 'stage' or 'step'")


# --- state ----------------------------------------------------------------------


@dataclass
class SimState:
    """Working state.

    In physical mode ``omega`` and ``u`` are the physical fields on
    ``config.grid``.  In self-similar mode they are the rescaled ``W`` and
    ``U`` on the reference grid; :meth:`physical` converts back.
    """

    omega: ScalarField
    u: VectorField
    t: float
    step_count: int = 0
    mode: str = "physical"
    linear_only: bool = False
    refresh: str = "stage"

    @property
    def T(self) -> float:
        return self.t + 1.0

    @property
    def s(self) -> float:
        """Self-similar time ``ln(t + 1)``."""
        return math.log(self.T)

    def physical(self):
        """``(omega, u)`` in physical variables at time ``t``."""
        if self.mode == "physical":
            return self.omega, self.u
        T = self.T
        g = self.omega.grid.scaled(math.sqrt(T))
        om = ScalarField(g, self.omega.values / T**2, self.t)
        u = VectorField(g, self.u.ur / T**1.5, self.u.uz / T**1.5, self.t)
        return om, u


class MomentRecord(NamedTuple):
    t: float
    I: float
    J: float
    Jdot: float
    l1: float
    l2: float
    linf: float
    w_r_l1: float
    w_r2_l1: float
    u_linf: float
    rem1_l1: float
    rem2_l1: float


RECORD_COLUMNS = MomentRecord._fields


class RunResult(NamedTuple):
    records: list
    snapshots: list
    velocities: list
    failure: str | None = None


# --- spatial operators ------------------------------------------------------------


def axisymmetric_laplacian(w: np.ndarray, grid: Grid) -> np.ndarray:
    """``d_rr w + d_r w / r + d_zz w - w / r^2`` with the axis and far-field ghosts."""
    dr, dz = grid.dr, grid.dz
    r = grid.r[:, None]
    pad = np.zeros((w.shape[0] + 2, w.shape[1] + 2))
    pad[1:-1, 1:-1] = w
    pad[0, 1:-1] = -w[0]  # omega(-r) = -omega(r): the Dirichlet condition on the axis
    c = pad[1:-1, 1:-1]
    e, wst = pad[2:, 1:-1], pad[:-2, 1:-1]
    n, sth = pad[1:-1, 2:], pad[1:-1, :-2]
    return (e - 2 * c + wst) / dr**2 + (e - wst) / (2 * dr * r) + (n - 2 * c + sth) / dz**2 - c / r**2


def flux_divergence(qr: np.ndarray, qz: np.ndarray, grid: Grid) -> np.ndarray:
    """Finite-volume ``d_r qr + d_z qz`` with averaged face fluxes and closed boundaries."""
    fr = np.zeros((qr.shape[0] + 1, qr.shape[1]))
    fr[1:-1] = 0.5 * (qr[1:] + qr[:-1])
    fz = np.zeros((qz.shape[0], qz.shape[1] + 1))
    fz[:, 1:-1] = 0.5 * (qz[:, 1:] + qz[:, :-1])
    return (fr[1:] - fr[:-1]) / grid.dr + (fz[:, 1:] - fz[:, :-1]) / grid.dz


def _transport_speed(state: SimState, u: VectorField, s: float | None = None):
    g = state.omega.grid
    if state.mode == "physical":
        return float(np.max(np.abs(u.ur)) if u.ur.size else 0.0), float(np.max(np.abs(u.uz)))
    R, Z = g.mesh()
    e = math.exp(-(state.s if s is None else s))
    return float(np.max(np.abs(0.5 * R - e * u.ur))), float(np.max(np.abs(0.5 * Z - e * u.uz)))


def stability_limit(state: SimState, cfl: float, diffusion_safety: float) -> float:
    """Largest admissible step (in t for physical mode, in ``s = ln T`` otherwise)."""
    g = state.omega.grid
    h = min(g.dr, g.dz)
    vr, vz = _transport_speed(state, state.u)
    v = max(vr, vz)
    limits = [diffusion_safety * h * h / 2.0, diffusion_safety * (0.5 * g.dr) ** 2]
    if v > 0:
        limits.append(cfl * h / v)
    return min(limits)


def _velocity(state: SimState, w: ScalarField) -> VectorField:
    if state.linear_only or not np.any(w.values):
        z = np.zeros(w.grid.shape)
        return VectorField(w.grid, z, z.copy(), w.time)
    return velocity_from_vorticity(w)


def _rhs(state: SimState, w: np.ndarray, u: VectorField, s: float | None) -> np.ndarray:
    g = state.omega.grid
    out = axisymmetric_laplacian(w, g)
    if state.mode == "self_similar":
        R, Z = g.mesh()
        out += 0.5 * flux_divergence(R * w, Z * w, g) + w
        if not state.linear_only:
            out -= math.exp(-s) * flux_divergence(u.ur * w, u.uz * w, g)
    elif not state.linear_only:
        out -= flux_divergence(u.ur * w, u.uz * w, g)
    return out


def _advance(state: SimState, dt: float, check: tuple | None) -> SimState:
    if not dt > 0:
        raise ValueError("step size must be positive")
    if check is not None:
        lim = stability_limit(state, *check)
        if dt > lim * (1 + 1e-12):
            raise StabilityError(
                f"step {dt:.6g} exceeds the stability limit {lim:.6g} at t = {state.t:.6g} "
                f"(step {state.step_count})"
            )
    g = state.omega.grid
    w0 = state.omega.values
    ss = state.mode == "self_similar"
    s0 = state.s if ss else None
    k1 = _rhs(state, w0, state.u, s0)
    w_half = w0 + 0.5 * dt * k1
    if ss:
        s_half = s0 + 0.5 * dt
        t_half = math.exp(s_half) - 1.0
    else:
        s_half = None
        t_half = state.t + 0.5 * dt
    if not np.all(np.isfinite(w_half)):
        raise StabilityError(f"non-finite values at step {state.step_count + 1}")
    if state.refresh == "stage":
        u_half = _velocity(state, ScalarField(g, w_half, t_half))
    else:
        u_half = state.u
    k2 = _rhs(state, w_half, u_half, s_half)
    w1 = w0 + dt * k2
    if not np.all(np.isfinite(w1)):
        raise StabilityError(f"non-finite values at step {state.step_count + 1}")
    t1 = math.exp(s0 + dt) - 1.0 if ss else state.t + dt
    om = ScalarField(g, w1, t1)
    return replace(state, omega=om, u=_velocity(state, om), t=t1, step_count=state.step_count + 1)


def step(state: SimState, dt: float, cfl: float = 0.4, diffusion_safety: float = 0.4) -> SimState:
    """One midpoint step of size ``dt`` in physical time.

    Raises :class:`StabilityError` when ``dt`` exceeds :func:`stability_limit`
    or the update produces non-finite values.
    """
    if state.mode != "physical":
        raise ValueError("step() advances physical-mode states; use self_similar_step")
    return _advance(state, dt, (cfl, diffusion_safety))


def self_similar_step(state: SimState, ds: float, cfl: float = 0.4, diffusion_safety: float = 0.4) -> SimState:
    """One midpoint step of size ``ds`` in the self-similar time ``s = ln(t+1)``."""
    if state.mode != "self_similar":
        raise ValueError("self_similar_step() needs a self-similar state")
    return _advance(state, ds, (cfl, diffusion_safety))


def initial_state(config: SimConfig) -> SimState:
    """Sample the initial data and compute its velocity."""
    g = config.grid
    if config.mode == "physical":
        om = config.init.sample(g, config.t0)
    else:
        T0 = config.t0 + 1.0
        phys = config.init.sample(g.scaled(math.sqrt(T0)), config.t0)
        om = ScalarField(g, phys.values * T0**2, config.t0)
    st = SimState(om, VectorField(g, np.zeros(g.shape), np.zeros(g.shape)), config.t0, 0, config.mode,
                  config.linear_only, config.refresh)
    st.u = _velocity(st, om)
    return st


# --- diagnostics --------------------------------------------------------------------


def jdot(state: SimState) -> float:
    """``int (2 r z u_r + r^2 u_z) omega`` at the state's time (physical variables)."""
    om, u = state.physical()
    return _jdot(om, u)


def _jdot(om: ScalarField, u: VectorField) -> float:
    R, Z = om.grid.mesh()
    return float(np.sum((2 * R * Z * u.ur + R * R * u.uz) * om.values) * om.grid.cell_area)


_W_R = WeightSpec.power(1.0)
_W_R2 = WeightSpec.power(2.0)


def moment_record(om: ScalarField, u: VectorField, I0: float) -> MomentRecord:
    """All per-time diagnostics of one physical snapshot."""
    t = om.time
    I = moment_I(om)
    J = moment_J(om)
    if t > 0:
        g1 = gaussian_term("G1", om.grid, t, I0)
        rem1 = om.values - g1.values
        rem2 = rem1 - gaussian_term("G2", om.grid, t, J).values
        area = om.grid.cell_area
        rem1_l1 = float(np.abs(rem1).sum() * area)
        rem2_l1 = float(np.abs(rem2).sum() * area)
    else:
        rem1_l1 = rem2_l1 = math.nan
    return MomentRecord(
        t=t,
        I=I,
        J=J,
        Jdot=_jdot(om, u),
        l1=weighted_lp_norm(om, 1),
        l2=weighted_lp_norm(om, 2),
        linf=weighted_lp_norm(om, math.inf),
        w_r_l1=weighted_lp_norm(om, 1, _W_R),
        w_r2_l1=weighted_lp_norm(om, 1, _W_R2),
        u_linf=float(np.max(u.magnitude())),
        rem1_l1=rem1_l1,
        rem2_l1=rem2_l1,
    )


def _output_times(config: SimConfig):
    times = []
    k = 1
    while True:
        t = config.t0 + k * config.output_every
        if t >= config.t_end - 1e-12 * max(1.0, config.t_end):
            break
        times.append(t)
        k += 1
    times.append(config.t_end)
    return times


def run(config: SimConfig, progress=None) -> RunResult:
    """Integrate from ``t0`` to ``t_end`` at the stability limit.

    A record and a snapshot (vorticity and velocity, physical variables) are
    taken at ``t0`` and every ``output_every``.  On instability the partial
    results are returned with ``failure`` set.
    """
    state = initial_state(config)
    om, u = state.physical()
    I0 = moment_I(om)
    records = [moment_record(om, u, I0)]
    snaps, vels = [om], [u]
    ss = config.mode == "self_similar"
    lim_args = (config.cfl, config.diffusion_safety)
    try:
        for t_out in _output_times(config):
            target = math.log(t_out + 1.0) if ss else t_out
            while True:
                here = state.s if ss else state.t
                remaining = target - here
                if remaining <= 1e-13 * max(1.0, abs(target)):
                    break
                lim = stability_limit(state, *lim_args)
                n = max(1, math.ceil(remaining / lim - 1e-9))
                state = _advance(state, remaining / n, lim_args)
            # land exactly on the output time
            state.t = t_out
            state.omega = replace(state.omega, time=t_out)
            om, u = state.physical()
            records.append(moment_record(om, u, I0))
            snaps.append(om)
            vels.append(u)
            if progress is not None:
                progress(state, records[-1])
    except StabilityError as exc:
        return RunResult(records, snaps, vels, str(exc))
    return RunResult(records, snaps, vels, None)

"""Measurements behind the acceptance table.

Every ``measure_*`` function returns plain numbers; the ``check_*`` helpers
turn a measured value and its tolerance into a :class:`Check` row.
The CLI and the acceptance tests both build on these functions.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .asymptotics import estimate_J_infinity, fit_decay_exponent, omega_tilde, velocity_gap, column
from .biot_savart import u_profile, u_profile_field, velocity_from_vorticity
from .estimates import (
    EstimateCase,
    GronwallParams,
    gronwall_bound,
    gronwall_simulate,
    measure_rate,
)
from .grid_fields import Grid, moment_I, moment_J, weighted_lp_norm
from .semigroup import apply_S, gaussian_term, profile, profile_field
from .solver import InitialData, RunResult, SimConfig, run
from .specfun import kernel_k, kernel_k_deriv, kernel_k_quadrature

DESK_GRID = Grid(128, 256, 16.0, 16.0)


class Check(NamedTuple):
    name: str
    expected: str
    measured: float
    tol: str
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"CHECK {self.name} expected={self.expected} measured={self.measured:.6g} tol={self.tol} {status}"


def check_le(name, measured, bound, expected=None):
    """``measured <= bound``."""
    return Check(name, expected or f"<={bound:g}", float(measured), f"{bound:g}", bool(measured <= bound))


def check_lt(name, measured, bound):
    """Strict ``measured < bound``."""
    return Check(name, f"<{bound:g}", float(measured), f"{bound:g}", bool(measured < bound))


def check_ge(name, measured, bound):
    return Check(name, f">={bound:g}", float(measured), f"{bound:g}", bool(measured >= bound))


def check_close(name, measured, target, tol):
    return Check(name, f"{target:g}", float(measured), f"{tol:g}", bool(abs(measured - target) <= tol))


# --- criteria 1, 2: the kernel ------------------------------------------------------


def measure_kernel_identity(n=50):
    """Max relative gap between the angular-integral and Bessel forms of K, and tau^1.5 K at 1e4."""
    taus = np.logspace(-4, 3, n)
    quad = np.array([kernel_k_quadrature(t) for t in taus])
    rel = float(np.max(np.abs(kernel_k(taus) / quad - 1.0)))
    return rel, float(1e4**1.5 * kernel_k(1e4))


def kernel_derivative_sups(n_points):
    """``sup (1+tau)^(3/2+i) |K^(i)(tau)|`` over ``{0} + logspace(-4, 4, n_points)``, i = 0..3."""
    taus = np.concatenate([[0.0], np.logspace(-4, 4, n_points)])
    return [float(np.max((1 + taus) ** (1.5 + i) * np.abs(kernel_k_deriv(i, taus)))) for i in range(4)]


def measure_kernel_derivative_stability(n=400):
    """Relative change of the suprema when the tau grid is refined 4x (max over i)."""
    coarse = kernel_derivative_sups(n)
    fine = kernel_derivative_sups(4 * n)
    change = max(abs(f - c) / f for f, c in zip(fine, coarse))
    return fine, change


# --- criteria 3, 4, 6: semigroup and moments -----------------------------------------


def measure_self_similarity(grid=DESK_GRID):
    """Relative L1 errors of ``S(t-s)[s^-a G(./sqrt s)]`` against ``t^-a G(./sqrt t)``."""
    out = {}
    for kind, power in (("G1", 2.0), ("G2", 2.5)):
        for s, t in ((1.0, 2.0), (1.0, 4.0)):
            w = profile_field(kind, grid, s)
            w = w.with_values(s ** (-power) * w.values)
            exact = gaussian_term(kind, grid, t)
            got = apply_S(t - s, w)
            out[(kind, s, t)] = weighted_lp_norm(got - exact.values, 1) / weighted_lp_norm(exact, 1)
    return out


def measure_composition(grid=DESK_GRID):
    w0 = profile_field("G1", grid)
    a = apply_S(1.0, apply_S(1.0, w0))
    b = apply_S(2.0, w0)
    return weighted_lp_norm(a - b.values, 1) / weighted_lp_norm(b, 1)


def measure_moments(grid=DESK_GRID):
    g1 = profile_field("G1", grid)
    g2 = profile_field("G2", grid)
    return {
        "I(G1)-1": moment_I(g1) - 1.0,
        "J(G2)-1": moment_J(g2) - 1.0,
        "J(G1)": moment_J(g1),
        "I(G2)": moment_I(g2),
    }


# --- criterion 5: Biot-Savart -------------------------------------------------------


def measure_biot_savart(grid=DESK_GRID):
    """Relative L-infinity velocity error on the inner half of the box."""
    u = velocity_from_vorticity(profile_field("G1", grid))
    ex = u_profile_field("G1", grid)
    R, Z = grid.mesh()
    inner = (R <= 0.5 * grid.rmax) & (np.abs(Z) <= 0.5 * grid.zmax)
    err = np.hypot(u.ur - ex.ur, u.uz - ex.uz)[inner].max()
    return float(err / ex.magnitude()[inner].max())


def measure_profile_curl(n_points=20, seed=0, h=1e-2):
    """Max |curl u^G1 - G1| at random interior points (4th-order differences)."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.2, 6.0, n_points)
    z = rng.uniform(-6.0, 6.0, n_points)

    def d(f, x, y, axis):
        e = (h, 0.0) if axis == 0 else (0.0, h)
        return (
            -f(x + 2 * e[0], y + 2 * e[1]) + 8 * f(x + e[0], y + e[1])
            - 8 * f(x - e[0], y - e[1]) + f(x - 2 * e[0], y - 2 * e[1])
        ) / (12 * h)

    ur = lambda x, y: u_profile("G1", x, y)[0]
    uz = lambda x, y: u_profile("G1", x, y)[1]
    curl = d(ur, r, z, 1) - d(uz, r, z, 0)
    return float(np.max(np.abs(curl - profile("G1", r, z))))


# --- criteria 7 to 10: nonlinear runs -------------------------------------------------


def ring_config(kind="gaussian_ring", grid=DESK_GRID, t_end=50.0):
    return SimConfig(grid=grid, t_end=t_end, mode="self_similar", init=InitialData(kind=kind), output_every=2.5)


def run_ring(kind="gaussian_ring", grid=DESK_GRID, t_end=50.0) -> RunResult:
    return run(ring_config(kind, grid, t_end))


def measure_impulse_drift(res: RunResult):
    I0 = res.records[0].I
    return max(abs(r.I - I0) for r in res.records) / abs(I0)


def measure_first_order_rates(res: RunResult, window=(10.0, 50.0)):
    l1 = fit_decay_exponent(column(res.records, "l1"), window).slope
    rem1 = fit_decay_exponent(column(res.records, "rem1_l1"), window).slope
    return l1, rem1


def measure_velocity_rates(res: RunResult, window=(10.0, 50.0), q=2.0):
    """Slope of ``||u||_inf`` and of the one-term velocity gap in ``L^q(R^3)``."""
    uinf = fit_decay_exponent(column(res.records, "u_linf"), window).slope
    I0 = res.records[0].I
    gaps = [
        (u.time, velocity_gap(u, u.time, I0, 0.0, q))
        for u in res.velocities
        if window[0] <= u.time <= window[1]
    ]
    gap = fit_decay_exponent(gaps, window).slope
    return uinf, gap


def measure_second_order(res: RunResult, times=(12.5, 25.0, 50.0)):
    """``t^(3/2) ||omega_tilde||_1`` at ``times`` and the tail exponent of ``J``."""
    I0 = res.records[0].I
    by_t = {round(s.time, 9): (s, r) for s, r in zip(res.snapshots, res.records)}
    scaled = []
    for t in times:
        s, r = by_t[round(t, 9)]
        scaled.append(t**1.5 * weighted_lp_norm(omega_tilde(s, t, I0, r.J), 1))
    return scaled, estimate_J_infinity(res.records).tail_slope


# --- criterion 11: estimates --------------------------------------------------------


ESTIMATE_CASES = (
    EstimateCase(1, 1, 0, 0),
    EstimateCase(1, 1, 0, 1),
    EstimateCase(1, 1, 0, 2),
    EstimateCase(1, 1, 1, 1),
    EstimateCase(1, 2, 0, 0),
    EstimateCase(1, math.inf, 0, 0),
    EstimateCase(2, 2, 0, 0),
    EstimateCase(1, 2, -1, 0),
    EstimateCase(1, 1, 0, 0, kind="divergence"),
    EstimateCase(1, 2, 0, 1, kind="divergence"),
    EstimateCase(2, 2, 0, 1, kind="divergence"),
    EstimateCase(1, 1, -1, 0, kind="divergence"),
)

SATURATING_CASE = EstimateCase(1, 1, 0, 0)


def estimate_times(t_min=10.0, t_max=1000.0, n=9):
    return np.logspace(math.log10(t_min), math.log10(t_max), n)


def estimate_data(grid=DESK_GRID):
    """Localized test data: G1, G2 (scalar) and the G1 velocity (vector)."""
    return {
        "G1": profile_field("G1", grid),
        "G2": profile_field("G2", grid),
        "uG1": u_profile_field("G1", grid),
    }


def measure_estimates(grid=DESK_GRID, t_list=None, cases=ESTIMATE_CASES):
    """Rows ``(case, datum, predicted, measured slope, stderr, constant)``."""
    t_list = estimate_times() if t_list is None else t_list
    data = estimate_data(grid)
    rows = []
    for case in cases:
        names = ("G1", "G2") if case.kind == "plain" else ("uG1",)
        for name in names:
            m = measure_rate(case, data[name], t_list)
            rows.append((case, name, case.predicted_exponent, m.fit.slope, m.fit.stderr, m.constant))
    return rows


# --- criterion 12: Grönwall -----------------------------------------------------------


def random_gronwall_params(n=20, seed=0):
    """Random admissible tuples; ranges keep the bound within double precision."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        beta = rng.uniform(0.3, 1.0)
        if rng.random() < 0.2:
            beta = 1.0
        out.append(
            (
                GronwallParams(
                    a=rng.uniform(0.1, 2.0),
                    b=rng.uniform(0.05, 0.5),
                    beta=beta,
                    gamma=beta + rng.uniform(0.5, 1.5),
                ),
                rng.uniform(20.0, 125.0),
            )
        )
    return out


def measure_gronwall(n=20, seed=0, n_steps=1000):
    """Rows ``(params, T, bound, max_f(T), max_f(4T))``."""
    rows = []
    for params, T in random_gronwall_params(n, seed):
        bound = gronwall_bound(params)
        m1 = gronwall_simulate(params, T, n_steps)
        m4 = gronwall_simulate(params, 4 * T, n_steps)
        rows.append((params, T, bound, m1, m4))
    return rows


# --- criterion 13: refinement ---------------------------------------------------------


ROUNDOFF_FLOOR = 1e-15


def refinement_ratio(coarse, fine):
    """``|coarse| / |fine|``; errors already at the rounding floor count as converged (inf)."""
    coarse, fine = abs(coarse), abs(fine)
    if coarse <= ROUNDOFF_FLOOR and fine <= ROUNDOFF_FLOOR:
        return math.inf
    if fine == 0:
        return math.inf
    return coarse / fine

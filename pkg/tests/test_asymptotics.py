import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axivort.asymptotics import (
    estimate_J_infinity,
    fit_decay_exponent,
    fit_log_corrected,
    omega_tilde,
    remainder_first,
    velocity_gap,
)
from axivort.biot_savart import u_profile_field
from axivort.grid_fields import Grid, ScalarField, VectorField, weighted_lp_norm
from axivort.semigroup import gaussian_term
from axivort.solver import MomentRecord

G = Grid(64, 128, 16.0, 16.0)


@settings(max_examples=50, deadline=None)
@given(
    slope=st.floats(-4.0, 2.0),
    c=st.floats(1e-3, 1e3),
    t0=st.floats(0.1, 100.0),
    n=st.integers(4, 30),
)
def test_fit_exact_on_power_laws(slope, c, t0, n):
    t = t0 * np.logspace(0, 1, n)
    fit = fit_decay_exponent(zip(t, c * t**slope))
    assert fit.slope == pytest.approx(slope, abs=1e-9)
    assert fit.stderr < 1e-8
    assert fit.predict(t[-1]) == pytest.approx(c * t[-1] ** slope, rel=1e-8)


def test_fit_window_selection():
    t = np.arange(1.0, 101.0)
    v = np.where(t < 10, t**-3.0, 1e-3 * (t / 10) ** -1.0)
    fit = fit_decay_exponent(zip(t, v), (10, 100))
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)
    assert fit.n_points == 91


def test_fit_rejects_bad_input():
    t = np.linspace(1, 10, 10)
    with pytest.raises(ValueError, match="octave"):
        fit_decay_exponent(zip(t, t), (5, 8))
    with pytest.raises(ValueError, match="at least 4"):
        fit_decay_exponent(zip([1, 2, 3], [1, 2, 3]))
    with pytest.raises(ValueError, match="positive"):
        fit_decay_exponent(zip(t, -t))


def test_log_corrected_fit():
    t = np.logspace(1, 3, 20)
    v = (1 + np.log1p(t)) * t**-1.5
    assert fit_log_corrected(zip(t, v)).slope == pytest.approx(-1.5, abs=1e-12)


def test_remainders_vanish_on_expansion():
    t, I0, J = 3.0, 2.0, -0.7
    om = ScalarField(G, gaussian_term("G1", G, t, I0).values + gaussian_term("G2", G, t, J).values, t)
    assert remainder_first(om, t, I0, 1) == pytest.approx(weighted_lp_norm(gaussian_term("G2", G, t, J), 1))
    assert weighted_lp_norm(omega_tilde(om, t, I0, J), 1) < 1e-15
    with pytest.raises(ValueError):
        remainder_first(om, 0.0, I0, 1)


def test_velocity_gap_zero_on_profiles_and_scaling():
    t, I0, Jv = 2.0, 1.5, 0.4
    u1 = u_profile_field("G1", G, t, I0)
    u2 = u_profile_field("G2", G, t, Jv)
    u = VectorField(G, u1.ur + u2.ur, u1.uz + u2.uz, t)
    for q in (2.0, 4.0, math.inf):
        assert velocity_gap(u, t, I0, Jv, q) < 1e-15
    # one-term gap of the G2 part alone is the full L^q(R^3) norm of it
    gap = velocity_gap(u, t, I0, 0.0, 2.0)
    R = G.mesh()[0]
    direct = math.sqrt(2 * math.pi * np.sum(R * (u2.ur**2 + u2.uz**2)) * G.cell_area)
    assert gap == pytest.approx(direct, rel=1e-12)
    with pytest.raises(ValueError):
        velocity_gap(u, t, I0, Jv, 1.0)


def _records(ts, Js):
    return [MomentRecord(t, 1.0, J, *([0.0] * 9)) for t, J in zip(ts, Js)]


def test_J_infinity_on_synthetic_tail():
    t = np.arange(2.5, 50.01, 2.5)
    J = 2.0 - 1.5 * t**-0.5
    est = estimate_J_infinity(_records(t, J))
    assert est.J_inf == pytest.approx(2.0, abs=1e-12)
    assert est.c == pytest.approx(-1.5, abs=1e-10)
    assert est.tail_slope == pytest.approx(-0.5, abs=1e-10)


def test_J_infinity_constant_J():
    t = np.arange(2.5, 50.01, 2.5)
    est = estimate_J_infinity(_records(t, np.full_like(t, 3.0)))
    assert est.J_inf == pytest.approx(3.0) and est.c == 0.0
    assert math.isnan(est.tail_slope)

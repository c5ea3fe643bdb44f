import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from axivort.grid_fields import Grid, ScalarField, VectorField, div_star, moment_I, moment_J, weighted_lp_norm
from axivort.semigroup import (
    apply_S,
    apply_S1,
    apply_S2,
    apply_S_direct,
    apply_S_div,
    gaussian_term,
    profile,
    profile_field,
)

G = Grid(64, 128, 16.0, 16.0)
SMALL = Grid(12, 24, 8.0, 8.0)


def rel_l1(a, b):
    return weighted_lp_norm(a - b.values, 1) / weighted_lp_norm(b, 1)


def test_profiles_closed_form():
    r, z = 2.0, -1.0
    g1 = r / (16 * math.sqrt(math.pi)) * math.exp(-(r * r + z * z) / 4)
    assert profile("G1", r, z) == pytest.approx(g1, rel=1e-15)
    assert profile("G2", r, z) == pytest.approx(z / 2 * g1, rel=1e-15)
    with pytest.raises(ValueError):
        profile("G1", 0.0, 1.0)
    with pytest.raises(ValueError):
        profile("G3", 1.0, 1.0)


def test_unit_moments():
    grid = Grid(128, 256, 16.0, 16.0)
    assert moment_I(profile_field("G1", grid)) == pytest.approx(1.0, abs=1e-6)
    assert moment_J(profile_field("G2", grid)) == pytest.approx(1.0, abs=1e-6)
    assert abs(moment_J(profile_field("G1", grid))) < 1e-15
    assert abs(moment_I(profile_field("G2", grid))) < 1e-15


def test_separable_evaluation_matches_direct_sum():
    w0 = SMALL.sample(lambda r, z: r * np.exp(-((r - 1) ** 2) - (z - 0.5) ** 2))
    for t in (0.05, 1.0, 7.0):
        a = apply_S(t, w0)
        b = apply_S_direct(t, w0)
        np.testing.assert_allclose(a.values, b.values, rtol=1e-12, atol=1e-16)


def test_identity_at_zero_and_time_stamp():
    w0 = ScalarField(G, profile_field("G1", G).values, 3.0)
    s0 = apply_S(0.0, w0)
    np.testing.assert_array_equal(s0.values, w0.values)
    assert apply_S(2.0, w0).time == 5.0
    with pytest.raises(ValueError):
        apply_S(-1.0, w0)
    with pytest.raises(ValueError):
        apply_S(0.0, w0, out_grid=SMALL)


@pytest.mark.parametrize("kind", ["G1", "G2"])
def test_self_similarity(kind):
    w = gaussian_term(kind, G, 1.0)
    for t in (2.0, 4.0):
        assert rel_l1(apply_S(t - 1, w), gaussian_term(kind, G, t)) < 1e-5


def test_composition():
    w0 = profile_field("G1", G)
    assert rel_l1(apply_S(1.0, apply_S(1.0, w0)), apply_S(2.0, w0)) < 1e-5


def test_impulse_conserved_and_parity_kept():
    w0 = G.sample(lambda r, z: r * np.exp(-((r - 1.5) ** 2) - 2 * z * z))
    I0 = moment_I(w0)
    for t in (0.5, 2.0):
        assert moment_I(apply_S(t, w0)) == pytest.approx(I0, rel=1e-5)
    odd = G.sample(lambda r, z: r * z * np.exp(-(r * r) - z * z))
    s = apply_S(1.0, odd)
    np.testing.assert_allclose(s.values, -s.values[:, ::-1], atol=1e-17)


def test_linear_moment_J_conserved():
    # S preserves both moments of the linear flow
    w0 = G.sample(lambda r, z: r * np.exp(-((r - 1) ** 2) - (z - 0.7) ** 2))
    J0 = moment_J(w0)
    assert moment_J(apply_S(1.5, w0)) == pytest.approx(J0, rel=1e-5)


def test_remainders_on_profile_data():
    # S(t) maps the t=1 profiles to the t+1 profiles, so the remainders are
    # differences of two Gaussian terms
    g1 = gaussian_term("G1", G, 1.0)
    for t in (1.0, 3.0):
        exact = gaussian_term("G1", G, t + 1).values - gaussian_term("G1", G, t).values
        scale = gaussian_term("G1", G, t).values.max()
        np.testing.assert_allclose(apply_S1(t, g1).values, exact, atol=1e-5 * scale)
    mix = ScalarField(G, g1.values + gaussian_term("G2", G, 1.0, 0.3).values)
    t = 2.0
    exact = (
        gaussian_term("G1", G, t + 1).values - gaussian_term("G1", G, t).values
        + gaussian_term("G2", G, t + 1, 0.3).values - gaussian_term("G2", G, t, 0.3).values
    )
    scale = gaussian_term("G1", G, t).values.max()
    np.testing.assert_allclose(apply_S2(t, mix).values, exact, atol=1e-5 * scale)
    with pytest.raises(ValueError):
        apply_S1(0.0, g1)


def test_divergence_form():
    R, Z = G.mesh()
    w = VectorField(G, R * np.exp(-(R * R) - Z * Z), np.zeros(G.shape))
    a = apply_S_div(1.0, w)
    np.testing.assert_allclose(a.values, apply_S(1.0, div_star(w)).values)


@settings(max_examples=20, deadline=None)
@given(
    t=st.floats(0.01, 20.0),
    c1=st.floats(-3, 3),
    c2=st.floats(-3, 3),
)
def test_linearity(t, c1, c2):
    a = SMALL.sample(lambda r, z: r * np.exp(-(r * r) - z * z))
    b = SMALL.sample(lambda r, z: r * z * np.exp(-((r - 1) ** 2) - z * z))
    lhs = apply_S(t, ScalarField(SMALL, c1 * a.values + c2 * b.values))
    rhs = c1 * apply_S(t, a).values + c2 * apply_S(t, b).values
    np.testing.assert_allclose(lhs.values, rhs, rtol=1e-10, atol=1e-15)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0.01, 50.0))
def test_positivity_preserved(t):
    w0 = SMALL.sample(lambda r, z: r * np.exp(-((r - 2) ** 2) - z * z))
    assert np.all(apply_S(t, w0).values >= 0)


def test_output_grid_resampling():
    w0 = profile_field("G1", G)
    wide = G.scaled(2.0)
    s = apply_S(3.0, w0, out_grid=wide)
    assert s.grid == wide
    assert rel_l1(s, gaussian_term("G1", wide, 4.0)) < 1e-4

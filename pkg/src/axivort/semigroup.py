r"""The linear semigroup S(t), its remainder operators and the Gaussian profiles.

For the linearised equation :math:`\partial_t\omega = \Delta\omega - \omega/r^2`
the solution operator has the explicit kernel

.. math::
    S(t)\omega_0(r,z) = \frac{r}{4\pi t^{5/2}} \int_\Omega
        K\!\left(\frac{r\rho}{t}\right)
        e^{-\frac{(r-\rho)^2+(z-\zeta)^2}{4t}} \rho^2\omega_0(\rho,\zeta)
        \,d\rho\,d\zeta .

The integral is approximated by the midpoint rule over the source cells.
Because the kernel factorises into an r-part and a z-part, the double sum is
computed as ``R @ w0 @ Z.T`` with

* ``R[i, k] = r_i rho_k^2 K(r_i rho_k / t) exp(-(r_i - rho_k)^2 / 4t) drho / (4 pi t^{5/2})``
* ``Z[j, l] = exp(-(z_j - zeta_l)^2 / 4t) dzeta``

which is the same sum, reordered, at a fraction of the cost of looping over
targets.  :func:`apply_S_direct` keeps the per-target loop as a reference.
"""

from __future__ import annotations

import math

import numpy as np

from .grid_fields import Grid, ScalarField, VectorField, div_star, moment_I, moment_J
from .specfun import SQRT_PI, bessel_ie, kernel_k

__all__ = [
    "profile",
    "profile_field",
    "gaussian_term",
    "apply_S",
    "apply_S_direct",
    "apply_S_div",
    "apply_S1",
    "apply_S2",
]

_KINDS = ("G1", "G2")


def _check_kind(kind):
    if kind not in _KINDS:
        raise ValueError(f"profile kind must be 'G1' or 'G2', got {kind!r}")


def profile(kind: str, r, z):
    """Closed-form Gaussian profiles.

    ``G1 = r/(16 sqrt(pi)) exp(-(r^2+z^2)/4)`` and
    ``G2 = -d_z G1 = r z/(32 sqrt(pi)) exp(-(r^2+z^2)/4)``.
    """
    _check_kind(kind)
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r <= 0):
        raise ValueError("profiles are defined for r > 0")
    gauss = np.exp(-(r * r + z * z) / 4.0)
    if kind == "G1":
        val = r / (16.0 * SQRT_PI) * gauss
    else:
        val = r * z / (32.0 * SQRT_PI) * gauss
    return float(val) if val.ndim == 0 else val


def profile_field(kind: str, grid: Grid, scale: float = 1.0, time: float = 0.0) -> ScalarField:
    """Samples of ``G(r/sqrt(scale), z/sqrt(scale))`` on ``grid`` (no amplitude factor)."""
    R, Z = grid.mesh()
    s = math.sqrt(scale)
    return ScalarField(grid, profile(kind, R / s, Z / s), time)


def gaussian_term(kind: str, grid: Grid, t: float, coef: float = 1.0) -> ScalarField:
    """Self-similar expansion term ``coef * t^-a * G(./sqrt(t))``.

    The exponent is ``a = 2`` for G1 and ``a = 5/2`` for G2, so that the
    term is exactly what S maps a point-like datum with unit moment to.
    """
    _check_kind(kind)
    if not t > 0:
        raise ValueError("t must be positive")
    power = 2.0 if kind == "G1" else 2.5
    f = profile_field(kind, grid, t)
    return f.with_values(coef * t ** (-power) * f.values)


def _check_t(t):
    t = float(t)
    if not t >= 0 or not math.isfinite(t):
        raise ValueError(f"t must be a finite nonnegative time, got {t}")
    return t


def _radial_matrix(t, r_out, rho, drho):
    tau = np.multiply.outer(r_out, rho) / t
    diff2 = np.subtract.outer(r_out, rho) ** 2 / (4.0 * t)
    # K(tau) exp(-(r-rho)^2/4t) = sqrt(pi)/tau * ie1(tau/2) * exp(-(r-rho)^2/4t):
    # the scaled Bessel keeps every factor finite
    kern = kernel_k(tau.ravel()).reshape(tau.shape) * np.exp(-diff2)
    return (r_out[:, None] * (rho**2)[None, :]) * kern * (drho / (4.0 * math.pi * t**2.5))


def _axial_matrix(t, z_out, zeta, dzeta):
    return np.exp(-np.subtract.outer(z_out, zeta) ** 2 / (4.0 * t)) * dzeta


def apply_S(t: float, w0: ScalarField, out_grid: Grid | None = None) -> ScalarField:
    """Evaluate ``S(t) w0`` at the nodes of ``out_grid`` (defaults to the source grid).

    ``t = 0`` returns a copy of ``w0`` (only allowed on the source grid).
    The result is stamped with time ``w0.time + t``.
    """
    t = _check_t(t)
    src = w0.grid
    out_grid = src if out_grid is None else out_grid
    if t == 0.0:
        if out_grid != src:
            raise ValueError("S(0) is the identity; it cannot change grids")
        return w0.copy()
    Rm = _radial_matrix(t, out_grid.r, src.r, src.dr)
    Zm = _axial_matrix(t, out_grid.z, src.z, src.dz)
    vals = Rm @ w0.values @ Zm.T
    return ScalarField(out_grid, vals, w0.time + t)


def apply_S_direct(t: float, w0: ScalarField, out_grid: Grid | None = None) -> ScalarField:
    """Per-target reference evaluation of ``S(t) w0`` (slow, for small grids)."""
    t = _check_t(t)
    if t == 0.0:
        return w0.copy()
    src = w0.grid
    out_grid = src if out_grid is None else out_grid
    RHO, ZETA = src.mesh()
    weight = RHO**2 * w0.values * src.cell_area
    out = np.zeros(out_grid.shape)
    for i, r in enumerate(out_grid.r):
        tau = r * RHO / t
        radial = math.sqrt(math.pi) / np.maximum(tau, 1e-300) * bessel_ie(1, tau / 2.0)
        radial = np.where(tau < 1e-8, SQRT_PI / 4.0, radial)
        for j, z in enumerate(out_grid.z):
            e = np.exp(-((r - RHO) ** 2 + (z - ZETA) ** 2) / (4.0 * t))
            out[i, j] = r / (4.0 * math.pi * t**2.5) * np.sum(radial * e * weight)
    return ScalarField(out_grid, out, w0.time + t)


def apply_S_div(t: float, w: VectorField, out_grid: Grid | None = None) -> ScalarField:
    """``S(t) div_* w`` with the discrete divergence of :func:`div_star`."""
    return apply_S(t, div_star(w), out_grid)


def apply_S1(t: float, w0: ScalarField, out_grid: Grid | None = None) -> ScalarField:
    """First remainder ``S(t) w0 - I(w0) t^-2 G1(./sqrt t)``."""
    if not float(t) > 0:
        raise ValueError("S1 needs t > 0")
    s = apply_S(t, w0, out_grid)
    g = gaussian_term("G1", s.grid, t, moment_I(w0))
    return s.with_values(s.values - g.values)


def apply_S2(t: float, w0: ScalarField, out_grid: Grid | None = None) -> ScalarField:
    """Second remainder: additionally subtracts ``J(w0) t^-5/2 G2(./sqrt t)``."""
    s1 = apply_S1(t, w0, out_grid)
    g = gaussian_term("G2", s1.grid, t, moment_J(w0))
    return s1.with_values(s1.values - g.values)

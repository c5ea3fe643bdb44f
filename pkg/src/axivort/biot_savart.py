r"""Axisymmetric Biot-Savart law and the closed-form Gaussian velocities.

The Stokes stream function of a swirl-free axisymmetric vorticity is

.. math::
    \psi(r,z) = \frac{1}{4\pi}\int_\Omega\int_0^{2\pi}
        \frac{r\rho\cos\theta\,\omega(\rho,\zeta)}
             {\sqrt{(z-\zeta)^2 + r^2 + \rho^2 - 2r\rho\cos\theta}}
        \,d\theta\,d\rho\,d\zeta ,

and ``u_r = -(1/r) d_z psi``, ``u_z = (1/r) d_r psi``.  With
``A = (r+rho)^2 + (z-zeta)^2`` and ``m = 4 r rho / A`` the angular integral is

.. math::
    \int_0^{2\pi}\frac{\cos\theta\,d\theta}{\sqrt{\cdots}}
        = \frac{4}{\sqrt A}\Big[\big(\tfrac{2}{m}-1\big)K(m)
                               - \tfrac{2}{m}E(m)\Big],

with K, E the complete elliptic integrals of parameter ``m``.

Discretisation.  The kernel only depends on ``z - zeta`` through the node
offset, so for every pair of radial indices the z-sum is a discrete
(Toeplitz) convolution.  It is evaluated exactly, up to rounding, with
zero-padded real FFTs; no approximation of the kernel is involved.  Source
cells adjacent to the target (and the self cell, where the kernel has an
integrable logarithmic singularity) are integrated accurately against the
piecewise-linear reconstruction of the vorticity instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .grid_fields import Grid, ScalarField, VectorField
from .specfun import SQRT_PI, gauss_primitive

__all__ = [
    "StreamFunction",
    "complete_elliptic",
    "ring_kernel",
    "ring_kernel_quadrature",
    "stream_psi",
    "velocity_from_vorticity",
    "u_profile",
    "u_profile_field",
]

_MARGIN = 2  # extra target cells around the box, for centred differences


@dataclass
class StreamFunction:
    """Stream function on a grid.

    ``psi`` has the grid shape; ``psi_ext`` carries two extra layers on every
    side (the r < 0 layers filled by the even reflection in r).
    """

    grid: Grid
    psi: np.ndarray
    psi_ext: np.ndarray | None = None

    def boundary_max(self) -> float:
        """Largest |psi| on the outer edges, relative to the interior maximum."""
        p = np.abs(self.psi)
        top = p.max()
        if top == 0:
            return 0.0
        edge = max(p[-1, :].max(), p[:, 0].max(), p[:, -1].max())
        return float(edge / top)


# --- complete elliptic integrals ---------------------------------------------


def _elliptic_agm(m, m1):
    """K and E from the arithmetic-geometric mean; ``m1 = 1 - m`` passed exactly."""
    a = np.ones_like(m)
    b = np.sqrt(m1)
    c2sum = 0.5 * m  # sum 2^{n-1} c_n^2 with c_0^2 = m
    pw = 0.5
    for _ in range(40):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        pw *= 2.0
        c2sum = c2sum + pw * c * c
        if np.all(np.abs(c) <= 1e-17 * a):
            break
    K = math.pi / (2.0 * a)
    E = K * (1.0 - c2sum)
    return K, E


def complete_elliptic(m):
    """Complete elliptic integrals ``(K(m), E(m))`` for parameter ``0 <= m < 1``.

    Computed with the arithmetic-geometric mean, accurate to a few ulp.
    """
    arr = np.asarray(m, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr >= 1):
        raise ValueError("complete_elliptic needs 0 <= m < 1")
    K, E = _elliptic_agm(np.atleast_1d(arr), 1.0 - np.atleast_1d(arr))
    if arr.ndim == 0:
        return float(K[0]), float(E[0])
    return K, E


@lru_cache(maxsize=None)
def _small_m_coefficients(n_terms=24):
    # f(m) = (2/m - 1) K - (2/m) E = (pi/2) sum_k [a_{k+1} 4(k+1)/(2k+1) - a_k] m^k
    a = [(math.comb(2 * n, n) / 4.0**n) ** 2 for n in range(n_terms + 2)]
    return np.array(
        [0.5 * math.pi * (a[k + 1] * 4 * (k + 1) / (2 * k + 1) - a[k]) for k in range(n_terms)]
    )


def _angular_f(m, m1):
    """``(2/m - 1) K(m) - (2/m) E(m)``, stable for small m and for m -> 1."""
    out = np.empty_like(m)
    small = m < 0.05
    if np.any(small):
        c = _small_m_coefficients()
        ms = m[small]
        acc = np.zeros_like(ms)
        for ck in c[::-1]:
            acc = acc * ms + ck
        out[small] = acc
    big = ~small
    if np.any(big):
        K, E = _elliptic_agm(m[big], m1[big])
        mb = m[big]
        out[big] = (2.0 / mb - 1.0) * K - (2.0 / mb) * E
    return out


def ring_kernel(r, rho, d):
    r"""Angular integral times ``r rho``: ``r rho int_0^{2pi} cos(t) / |x - y| dt``.

    ``psi`` is ``1/(4 pi)`` times the area integral of this kernel against
    the vorticity.  Symmetric in ``(r, rho)`` and even in ``d``.
    """
    r, rho, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, rho, d)))
    A = (r + rho) ** 2 + d * d
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.where(A > 0, 4.0 * r * rho / A, 0.0)
        m1 = np.where(A > 0, ((r - rho) ** 2 + d * d) / A, 1.0)
        f = _angular_f(m.ravel(), m1.ravel()).reshape(m.shape)
        out = np.where(A > 0, r * rho * 4.0 / np.sqrt(A) * f, 0.0)
    return out if out.ndim else float(out)


def ring_kernel_quadrature(r, rho, d):
    """Reference value of :func:`ring_kernel` by adaptive quadrature in theta."""
    import warnings

    from scipy.integrate import IntegrationWarning, quad

    f = lambda th: math.cos(th) / math.sqrt(d * d + r * r + rho * rho - 2 * r * rho * math.cos(th))
    with warnings.catch_warnings():
        # the requested tolerance sits at the roundoff floor on purpose
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, 0.0, math.pi, epsabs=0.0, epsrel=1e-13, limit=400)
    return r * rho * 2.0 * val


# --- cell integrals near the singularity ------------------------------------


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w  # nodes and weights on [0, 1]


def _rect_moments(r, x0, x1, y0, y1, n=12):
    """Tensor Gauss-Legendre moments of the kernel over ``[x0,x1] x [y0,y1]``.

    Coordinates: x = rho - r (radial offset), y = d = z - zeta.  Returns
    ``(int G, int G x, int G y)``.
    """
    s, w = _gauss(n)
    X = x0 + (x1 - x0) * s
    Y = y0 + (y1 - y0) * s
    W = np.outer(w, w) * (x1 - x0) * (y1 - y0)
    G = W * ring_kernel(r, r + X[:, None], Y[None, :])
    return np.array([G.sum(), (G * X[:, None]).sum(), (G * Y[None, :]).sum()])


def _corner_rect_moments(r, a, b, n=24):
    """Moments over the rectangle between ``(0, 0)`` and ``(a, b)`` (signed), singular at the origin.

    Split along the diagonal into two triangles with the singular point at a
    vertex; the Duffy map ``(u, v) -> (u, u v)`` turns the log singularity
    into the harmless ``u log u``.
    """
    s, w = _gauss(n)
    U, V = np.meshgrid(s, s, indexing="ij")
    jac = np.outer(w, w) * abs(a * b) * U
    out = np.zeros(3)
    for x, y in ((a * U, b * U * V), (a * U * V, b * U)):
        G = jac * ring_kernel(r, r + x, y)
        out += [G.sum(), (G * x).sum(), (G * y).sum()]
    return out


def _self_cell_moments(r, dr, dz):
    h, k = 0.5 * dr, 0.5 * dz
    total = np.zeros(3)
    for a in (h, -h):
        for b in (k, -k):
            total += _corner_rect_moments(r, a, b)
    return total


# --- the discrete operator ---------------------------------------------------


class _BiotSavartOperator:
    """Discrete Biot-Savart operator for one grid.

    Far field: midpoint sum, with the z-convolution done by FFT on a kernel
    table that is cached in Fourier space when it fits in memory.  Near
    field (the 3 x 3 source cells around each target): cell integrals of the
    kernel against the piecewise-linear reconstruction of the vorticity,
    applied as a small local stencil.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        g = grid
        M = _MARGIN
        self.n_r_out = g.nr + M  # targets r_0 .. r_{nr+M-1}
        self.n_z_out = g.nz + 2 * M  # targets z_{-M} .. z_{nz+M-1}
        self.max_off = g.nz - 1 + M
        n_off = 2 * self.max_off + 1
        self.fft_len = sfft.next_fast_len(n_off + g.nz - 1, real=True)
        self.r_out = (np.arange(self.n_r_out) + 0.5) * g.dr
        self._table = None
        # the full table costs n_r_out * nr * (fft_len/2+1) complex values
        self.cache_table = self.n_r_out * g.nr * (self.fft_len // 2 + 1) * 16 <= 400e6
        self.near = self._near_coefficients()

    def _near_coefficients(self):
        """``near[c, i, a+1, b+1]`` for source k = i + a, offset j - l = b; c indexes
        the (value, d_rho, d_zeta) reconstruction coefficients."""
        g = self.grid
        near = np.zeros((3, self.n_r_out, 3, 3))
        for i, ri in enumerate(self.r_out):
            for a in (-1, 0, 1):
                k = i + a
                if not 0 <= k < g.nr:
                    continue
                xc = g.r[k] - ri
                for b in (-1, 0, 1):
                    yc = b * g.dz
                    if a == 0 and b == 0:
                        m0, m1, m2 = _self_cell_moments(ri, g.dr, g.dz)
                    else:
                        m0, m1, m2 = _rect_moments(
                            ri, xc - 0.5 * g.dr, xc + 0.5 * g.dr, yc - 0.5 * g.dz, yc + 0.5 * g.dz
                        )
                    # rho - rho_k = x - xc and zeta - zeta_l = yc - y on this cell
                    near[:, i, a + 1, b + 1] = (m0, m1 - xc * m0, yc * m0 - m2)
        return near / (4.0 * math.pi)

    def _kernel_rows(self, i_slice):
        g = self.grid
        offs = (np.arange(-self.max_off, self.max_off + 1)) * g.dz
        idx = np.arange(*i_slice.indices(self.n_r_out))
        kern = ring_kernel(self.r_out[idx][:, None, None], g.r[None, :, None], offs[None, None, :])
        kern *= g.cell_area / (4.0 * math.pi)
        # near cells are handled by the local stencil
        c = self.max_off
        for a_loc, i in enumerate(idx):
            lo, hi = max(0, i - 1), min(g.nr, i + 2)
            if lo < hi:
                kern[a_loc, lo:hi, c - 1 : c + 2] = 0.0
        return sfft.rfft(kern, n=self.fft_len, axis=-1)

    def _table_full(self):
        if self._table is None:
            self._table = self._kernel_rows(slice(0, self.n_r_out))
        return self._table

    def _near_field(self, omega):
        g = self.grid
        M = _MARGIN
        # vorticity and its centred slopes, padded: odd ghost across the axis,
        # zero beyond the outer edges
        pad = np.zeros((g.nr + M + 2, g.nz + 2 * M + 2))
        pad[1 : g.nr + 1, M + 1 : M + 1 + g.nz] = omega
        pad[0, M + 1 : M + 1 + g.nz] = -omega[0]
        d_rho = np.zeros_like(pad)
        d_rho[1:-1] = (pad[2:] - pad[:-2]) / (2.0 * g.dr)
        d_zeta = np.zeros_like(pad)
        d_zeta[:, 1:-1] = (pad[:, 2:] - pad[:, :-2]) / (2.0 * g.dz)
        fields = (pad, d_rho, d_zeta)
        for f in fields:
            f[0] = 0.0  # the ghost row is not a source
            f[g.nr + 1 :] = 0.0
        out = np.zeros((self.n_r_out, self.n_z_out))
        for c, f in enumerate(fields):
            for a in (-1, 0, 1):
                # source row k = i + a lives at pad row i + a + 1
                rows = f[1 + a : 1 + a + self.n_r_out]
                for b in (-1, 0, 1):
                    # target column j (from -M) sees source l = j - b, at pad column j - b + M + 1
                    cols = rows[:, 1 - b : 1 - b + self.n_z_out]
                    out += self.near[c, :, a + 1, b + 1][:, None] * cols
        return out

    def psi_ext(self, omega: np.ndarray) -> np.ndarray:
        """Stream function on the targets ``r_0..r_{nr+M-1}`` x ``z_{-M}..z_{nz+M-1}``."""
        W = sfft.rfft(omega, n=self.fft_len, axis=-1)
        if self.cache_table:
            P = np.einsum("ikf,kf->if", self._table_full(), W)
        else:
            P = np.empty((self.n_r_out, W.shape[1]), dtype=complex)
            step = 16
            for i0 in range(0, self.n_r_out, step):
                sl = slice(i0, min(i0 + step, self.n_r_out))
                P[sl] = np.einsum("ikf,kf->if", self._kernel_rows(sl), W)
        conv = sfft.irfft(P, n=self.fft_len, axis=-1)
        # target z_j (j from -M) pairs with conv index j + max_off
        start = self.max_off - _MARGIN
        return conv[:, start : start + self.n_z_out] + self._near_field(omega)


_OPERATORS: dict = {}


def _operator(grid: Grid) -> _BiotSavartOperator:
    op = _OPERATORS.get(grid)
    if op is None:
        if len(_OPERATORS) >= 4:
            _OPERATORS.pop(next(iter(_OPERATORS)))
        op = _OPERATORS[grid] = _BiotSavartOperator(grid)
    return op


def _extended_psi(omega: ScalarField) -> np.ndarray:
    g = omega.grid
    M = _MARGIN
    body = _operator(g).psi_ext(omega.values)
    # psi is even in r: psi(-r_k) = psi(r_k) gives the ghost layers below the axis
    ghost = body[M - 1 :: -1][:M]
    return np.concatenate([ghost, body], axis=0)


def stream_psi(omega: ScalarField) -> StreamFunction:
    """Stokes stream function of ``omega`` at the grid nodes."""
    M = _MARGIN
    ext = _extended_psi(omega)
    g = omega.grid
    return StreamFunction(g, ext[M : M + g.nr, M : M + g.nz].copy(), ext)


def _d4(f, h, axis):
    """Fourth-order centred first derivative on the interior of an array padded by 2."""
    sl = lambda a, b: tuple(slice(a, f.shape[ax] - b if b else None) if ax == axis else slice(2, -2) for ax in range(2))
    return (f[sl(0, 4)] - 8.0 * f[sl(1, 3)] + 8.0 * f[sl(3, 1)] - f[sl(4, 0)]) / (12.0 * h)


def velocity_from_vorticity(omega: ScalarField) -> VectorField:
    """Velocity ``(u_r, u_z) = (-d_z psi / r, d_r psi / r)`` at the grid nodes."""
    g = omega.grid
    if not np.any(omega.values):
        z = np.zeros(g.shape)
        return VectorField(g, z, z.copy(), omega.time)
    ext = _extended_psi(omega)
    r = g.r[:, None]
    ur = -_d4(ext, g.dz, axis=1) / r
    uz = _d4(ext, g.dr, axis=0) / r
    return VectorField(g, ur, uz, omega.time)


# --- closed-form velocities of the Gaussian profiles ------------------------


def _pqs(R):
    """P, Q = P'/R and S = Q'/R for P(R) = exp(-R^2/4)/R^2 - F(R)/R^3."""
    R = np.asarray(R, dtype=float)
    P = np.empty_like(R)
    Q = np.empty_like(R)
    S = np.empty_like(R)
    small = R < 1.5
    if np.any(small):
        x = R[small] ** 2
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        s = np.zeros_like(x)
        for k in range(40, 0, -1):
            ck = (-1) ** k * 2 * k / ((2 * k + 1) * 4.0**k * math.factorial(k))
            p = p * x + ck
            if k >= 2:
                q = q * x + ck * (2 * k - 2)
            if k >= 3:
                s = s * x + ck * (2 * k - 2) * (2 * k - 4)
        P[small], Q[small], S[small] = p, q, s
    big = ~small
    if np.any(big):
        Rb = R[big]
        e = np.exp(-Rb * Rb / 4.0)
        F = gauss_primitive(Rb)
        P[big] = e / Rb**2 - F / Rb**3
        Q[big] = -e * (0.5 / Rb**2 + 3.0 / Rb**4) + 3.0 * F / Rb**5
        S[big] = e * (0.25 / Rb**2 + 2.5 / Rb**4 + 15.0 / Rb**6) - 15.0 * F / Rb**7
    return P, Q, S


def u_profile(kind: str, r, z):
    """Closed-form velocity ``(u_r, u_z)`` generated by the profile G1 or G2.

    With ``phi = -(r/(4 sqrt pi)) d_r(F(R)/R)``, ``R = sqrt(r^2+z^2)`` and
    ``F(s) = int_0^s exp(-x^2/4) dx``, the G1 velocity is
    ``(-d_z phi / r, d_r phi / r)``; the G2 velocity is its ``-d_z``.
    """
    if kind not in ("G1", "G2"):
        raise ValueError(f"kind must be 'G1' or 'G2', got {kind!r}")
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(r <= 0):
        raise ValueError("u_profile is defined for r > 0")
    r, z = np.broadcast_arrays(r, z)
    P, Q, S = _pqs(np.hypot(r, z))
    c = 1.0 / (4.0 * SQRT_PI)
    if kind == "G1":
        ur = c * r * z * Q
        uz = -c * (2.0 * P + r * r * Q)
    else:
        ur = -c * r * (Q + z * z * S)
        uz = c * z * (2.0 * Q + r * r * S)
    if ur.ndim == 0:
        return float(ur), float(uz)
    return ur, uz


def u_profile_field(kind: str, grid: Grid, t: float = 1.0, coef: float = 1.0) -> VectorField:
    """``coef * t^-a * u^G(r/sqrt t, z/sqrt t)`` on a grid, ``a = 3/2`` (G1) or ``2`` (G2)."""
    if not t > 0:
        raise ValueError("t must be positive")
    R, Z = grid.mesh()
    s = math.sqrt(t)
    ur, uz = u_profile(kind, R / s, Z / s)
    power = 1.5 if kind == "G1" else 2.0
    f = coef * t ** (-power)
    return VectorField(grid, f * ur, f * uz)

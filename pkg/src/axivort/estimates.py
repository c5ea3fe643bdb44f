r"""Empirical checks of the semigroup and Biot-Savart estimates, and the
constructive Grönwall bound for Volterra inequalities with a singular kernel.

Semigroup estimates have the form

.. math::
    \|r^{\alpha+\alpha'} z^\gamma S(t)\omega_0\|_{L^q}
        \le C\,\|N(t)\omega_0\|_{L^p}\,t^{\frac{\alpha+\alpha'+\gamma}{2}+\frac1q-\frac1p},
    \qquad
    N(t) = \big((r/\sqrt t)^\beta + (r/\sqrt t)^\beta |z/\sqrt t|^\gamma\big)
           \big(1 + (r/\sqrt t)^{\alpha'}\big),

(an extra ``-1/2`` in the exponent when ``S(t)`` acts on ``div_* w``).  The
harness measures the exponent of the ratio of the two sides over a range
of times; the bound only says it cannot exceed the predicted value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .asymptotics import RateFit, fit_decay_exponent
from .biot_savart import velocity_from_vorticity
from .grid_fields import ScalarField, VectorField, div_star
from .semigroup import apply_S
from .specfun import beta_function

__all__ = [
    "EstimateCase",
    "RateMeasurement",
    "GronwallParams",
    "measure_rate",
    "measure_bs",
    "bs_sigma",
    "measure_bs_interpolation",
    "gronwall_t0",
    "gronwall_series",
    "gronwall_bound",
    "gronwall_simulate",
    "gronwall_exact_beta1",
]

_KINDS = ("plain", "divergence")


def _inv(p):
    return 0.0 if p == math.inf else 1.0 / p


@dataclass(frozen=True)
class EstimateCase:
    """One weighted ``L^p -> L^q`` estimate of the semigroup."""

    p: float
    q: float
    alpha: float
    beta: float
    gamma: float = 0.0
    alpha_prime: float = 0.0
    kind: str = "plain"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if not (1 <= self.p <= self.q <= math.inf):
            raise ValueError(f"need 1 <= p <= q <= inf, got p={self.p}, q={self.q}")
        if not (-1 <= self.alpha <= self.beta):
            raise ValueError(f"need -1 <= alpha <= beta, got alpha={self.alpha}, beta={self.beta}")
        top = 2.0 if self.kind == "plain" else 1.0
        if self.beta > top:
            raise ValueError(f"{self.kind} estimates need beta <= {top}, got {self.beta}")
        if self.gamma < 0 or self.alpha_prime < 0:
            raise ValueError("gamma and alpha_prime must be nonnegative")

    @property
    def predicted_exponent(self) -> float:
        e = 0.5 * (self.alpha + self.alpha_prime + self.gamma) + _inv(self.q) - _inv(self.p)
        return e - 0.5 if self.kind == "divergence" else e

    @property
    def saturating_exponent(self) -> float:
        """Exponent of the ratio for data with nonzero impulse (plain kind).

        Then ``S(t) w0 ~ I0 t^-2 G1(./sqrt t)`` while ``||N(t) w0||_p ~ t^(-beta/2)``.
        """
        return 0.5 * (self.alpha + self.alpha_prime + self.gamma) + _inv(self.q) - 2.0 + 0.5 * self.beta

    def weight_out(self, grid):
        R, Z = grid.mesh()
        w = R ** (self.alpha + self.alpha_prime)
        if self.gamma:
            w = w * np.abs(Z) ** self.gamma
        return w

    def weight_N(self, grid, t):
        R, Z = grid.mesh()
        x = R / math.sqrt(t)
        y = np.abs(Z) / math.sqrt(t)
        xb = x**self.beta
        return (xb + xb * y**self.gamma) * (1.0 + x**self.alpha_prime)


class RateMeasurement(NamedTuple):
    status: str  # "ok" or "zero-field"
    fit: RateFit | None
    constant: float
    times: tuple
    ratios: tuple


def _norm(values, area, p):
    a = np.abs(values)
    if p == math.inf:
        return float(a.max())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * (np.sum((a / m) ** p) * area) ** (1.0 / p))


def measure_rate(case: EstimateCase, w0, t_list) -> RateMeasurement:
    """Fit the time exponent of ``||r^(a+a') z^g S(t) w0||_q / ||N(t) w0||_p``.

    ``w0`` is a :class:`ScalarField` for the plain kind and a
    :class:`VectorField` for the divergence kind.  The output of ``S(t)`` is
    sampled on the source grid stretched by ``sqrt(1 + t)`` so the spreading
    solution stays inside it.
    """
    t_list = [float(t) for t in t_list]
    if any(b <= a for a, b in zip(t_list, t_list[1:])) or t_list[0] <= 0:
        raise ValueError("t_list must be increasing and positive")
    if case.kind == "plain":
        if not isinstance(w0, ScalarField):
            raise TypeError("plain cases act on a ScalarField")
        src = w0
        mag = np.abs(w0.values)
    else:
        if not isinstance(w0, VectorField):
            raise TypeError("divergence cases act on a VectorField")
        src = div_star(w0)
        mag = w0.magnitude()
    g = w0.grid
    if not np.any(mag):
        return RateMeasurement("zero-field", None, 0.0, tuple(t_list), tuple(0.0 for _ in t_list))
    ratios = []
    for t in t_list:
        out_grid = g.scaled(math.sqrt(1.0 + t))
        s = apply_S(t, src, out_grid)
        num = _norm(case.weight_out(out_grid) * s.values, out_grid.cell_area, case.q)
        den = _norm(case.weight_N(g, t) * mag, g.cell_area, case.p)
        ratios.append(num / den)
    fit = fit_decay_exponent(list(zip(t_list, ratios)), (t_list[0], t_list[-1]))
    # observed constant: the ratio with the predicted power of t divided out
    const = max(r / t**case.predicted_exponent for r, t in zip(ratios, t_list))
    return RateMeasurement("ok", fit, float(const), tuple(t_list), tuple(ratios))


def _check_bs_exponents(p, q, alpha, beta):
    if not (1 < p < q < math.inf):
        raise ValueError(f"need 1 < p < q < inf, got p={p}, q={q}")
    if not (0 <= alpha <= beta <= 2 and 0 <= beta - alpha < 1):
        raise ValueError("need 0 <= alpha <= beta <= 2 and 0 <= beta - alpha < 1")
    if abs(1.0 / p - (1.0 / q + 0.5 * (1 + alpha - beta))) > 1e-12:
        raise ValueError("exponents must satisfy 1/p = 1/q + (1 + alpha - beta)/2")


def measure_bs(p: float, q: float, alpha: float, beta: float, omega: ScalarField, u: VectorField | None = None) -> float:
    """``||r^alpha u||_{L^q} / ||r^beta omega||_{L^p}`` with ``u`` the Biot-Savart velocity.

    Both norms are over the half-plane.  Zero vorticity gives 0.
    """
    _check_bs_exponents(p, q, alpha, beta)
    g = omega.grid
    r = g.r[:, None]
    den = _norm(r**beta * omega.values, g.cell_area, p)
    if den == 0:
        return 0.0
    u = velocity_from_vorticity(omega) if u is None else u
    num = _norm(r**alpha * u.magnitude(), g.cell_area, q)
    return num / den


def bs_sigma(p: float, q: float) -> float:
    """Interpolation exponent ``sigma = (p/2)(q-2)/(q-p)`` (limit ``p/2`` at ``q = inf``)."""
    if not (1 <= p < 2 < q <= math.inf):
        raise ValueError("need 1 <= p < 2 < q <= inf")
    if q == math.inf:
        return 0.5 * p
    return 0.5 * p * (q - 2.0) / (q - p)


def measure_bs_interpolation(p: float, q: float, omega: ScalarField, u: VectorField | None = None) -> float:
    """``||u||_inf / (||omega||_p^sigma ||omega||_q^(1-sigma))``."""
    sigma = bs_sigma(p, q)
    g = omega.grid
    a = _norm(omega.values, g.cell_area, p)
    b = _norm(omega.values, g.cell_area, q)
    if a == 0 or b == 0:
        return 0.0
    u = velocity_from_vorticity(omega) if u is None else u
    return float(u.magnitude().max()) / (a**sigma * b ** (1 - sigma))


# --- Grönwall ------------------------------------------------------------------


@dataclass(frozen=True)
class GronwallParams:
    """``f(t) <= a + b int_0^t (t-s)^(beta-1) (1+s)^(-gamma) f(s) ds``."""

    a: float
    b: float
    beta: float
    gamma: float
    T: float = math.inf

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("need a >= 0 and b >= 0")
        if not 0 < self.beta <= 1:
            raise ValueError("need 0 < beta <= 1")
        if not self.gamma > self.beta:
            raise ValueError("need gamma > beta")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")


def gronwall_t0(params: GronwallParams) -> float:
    """Splitting time of the proof: the tail integral is at most half of ``||f||``."""
    b, be, ga = params.b, params.beta, params.gamma
    if be < 1:
        base = 2.0 * b * beta_function(be, 1.0 - be)
    else:
        base = 2.0 * b / (ga - be)
    return base ** (1.0 / (ga - be))


def gronwall_series(b: float, beta: float, t: float, rtol: float = 1e-12, max_terms: int = 10**6) -> float:
    """``sum_k c_k t^(k beta)`` with ``c_0 = 1``, ``c_(k+1) = c_k b B(beta, k beta + 1)``.

    Terms are accumulated in log space; the sum stops once the next terms
    are decreasing and below ``rtol`` of the partial sum.
    """
    if t == 0 or b == 0:
        return 1.0
    log_c = 0.0
    log_t = beta * math.log(t)
    logs = [0.0]
    lb = math.log(b)
    prev = 0.0
    for k in range(max_terms):
        # log B(beta, k beta + 1)
        log_c += lb + gammaln(beta) + gammaln(k * beta + 1) - gammaln((k + 1) * beta + 1)
        term = log_c + (k + 1) * log_t
        logs.append(term)
        top = max(logs)
        if term < prev and term < top + math.log(rtol) and k > 2:
            break
        prev = term
    else:
        raise RuntimeError("Grönwall series did not converge within the term limit")
    arr = np.array(logs)
    top = arr.max()
    total = top + math.log(np.sum(np.exp(arr - top)))
    return math.exp(total) if total < 709 else math.inf


def gronwall_bound(params: GronwallParams) -> float:
    """Uniform bound ``a C_{b,beta,gamma}`` on ``f``, assembled as in the constructive proof.

    ``||f|| <= a S + 2a + 2ab (t0^beta / beta) S`` with ``S = sum_k c_k t0^(k beta)``.
    ``b = 0`` gives ``a`` directly (there is no integral term).
    """
    a, b, be = params.a, params.b, params.beta
    if a == 0:
        return 0.0
    if b == 0:
        return a
    t0 = gronwall_t0(params)
    S = gronwall_series(b, be, t0)
    return a * S + 2.0 * a + 2.0 * a * b * (t0**be / be) * S


def _product_trapezoid_weights(n, h, beta):
    """Weights ``w[j]`` for ``int_0^{t_n} (t_n - s)^(beta-1) g(s) ds ~ sum_j w[j] g_j``.

    Exact for piecewise-linear ``g`` on the uniform grid ``t_j = j h``.
    """
    c = h**beta / (beta * (beta + 1.0))
    if n == 0:
        return np.zeros(1)
    j = np.arange(n + 1, dtype=float)
    k = n - j
    w = c * ((k + 1) ** (beta + 1) - 2 * k ** (beta + 1) + np.abs(k - 1) ** (beta + 1))
    w[0] = c * ((n - 1) ** (beta + 1) - (n - beta - 1) * n**beta)
    w[n] = c
    return w


def gronwall_simulate(params: GronwallParams, T: float, n_steps: int, max_iter: int = 200,
                      tol: float = 1e-13, sweep: str = "sequential", return_path: bool = False):
    """Solve the extremal equation ``f = a + A f`` on ``[0, T]`` and return ``max f``.

    Product-trapezoid discretisation of the singular kernel and Picard
    iteration.  ``sweep="sequential"`` uses already-updated earlier values
    inside a sweep (Gauss-Seidel order, converges in a few sweeps);
    ``sweep="jacobi"`` is the plain Picard map.
    """
    if not (T > 0 and math.isfinite(T)):
        raise ValueError("T must be finite and positive")
    if n_steps < 100:
        raise ValueError("n_steps must be at least 100")
    if sweep not in ("sequential", "jacobi"):
        raise ValueError("sweep must be 'sequential' or 'jacobi'")
    a, b, be, ga = params.a, params.b, params.beta, params.gamma
    t = np.linspace(0.0, T, n_steps + 1)
    if a == 0:
        f = np.zeros_like(t)
        return (0.0, t, f) if return_path else 0.0
    h = T / n_steps
    decay = (1.0 + t) ** (-ga)
    # W[n, j] * decay[j]: rows of the discrete Volterra operator
    W = np.zeros((n_steps + 1, n_steps + 1))
    for n in range(1, n_steps + 1):
        W[n, : n + 1] = _product_trapezoid_weights(n, h, be)
    W *= b * decay[None, :]
    f = np.full_like(t, a)
    for it in range(max_iter):
        if sweep == "jacobi":
            new = a + W @ f
        else:
            new = f.copy()
            for n in range(1, n_steps + 1):
                new[n] = a + W[n, :n] @ new[:n] + W[n, n] * f[n]
        change = np.max(np.abs(new - f)) / max(1.0, np.max(np.abs(new)))
        f = new
        if change <= tol:
            break
    else:
        raise RuntimeError(f"Picard iteration did not converge in {max_iter} iterations")
    m = float(f.max())
    return (m, t, f) if return_path else m


def gronwall_exact_beta1(params: GronwallParams, t):
    """Closed-form solution for ``beta = 1``: ``a exp(b ((1+t)^(1-g) - 1) / (1-g))``."""
    if params.beta != 1:
        raise ValueError("closed form only for beta = 1")
    g = params.gamma
    t = np.asarray(t, dtype=float)
    return params.a * np.exp(params.b * ((1.0 + t) ** (1.0 - g) - 1.0) / (1.0 - g))

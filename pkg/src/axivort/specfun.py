r"""Special functions behind the linear semigroup kernel.

The kernel of the linearised axisymmetric vorticity operator is

.. math::
    K(\tau) = \frac{1}{\tau\sqrt{4\pi}}\int_{-\pi}^{\pi}
              e^{-\tau\sin^2(\phi/2)}\cos\phi\,d\phi
            = \frac{\sqrt{\pi}}{\tau}\,e^{-\tau/2} I_1(\tau/2),

so everything here reduces to modified Bessel functions of small integer
order.  All Bessel evaluations are carried out in exponentially scaled form
:math:`e^{-x}I_n(x)` so that nothing overflows for large arguments.

Two branches are used for :math:`I_n`: the ascending power series for
``x < series_cutoff`` and the Hankel large-argument expansion beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "KernelEvalPolicy",
    "DEFAULT_POLICY",
    "bessel_i",
    "bessel_ie",
    "kernel_k",
    "kernel_k_deriv",
    "kernel_k_quadrature",
    "beta_function",
    "gauss_primitive",
]

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class KernelEvalPolicy:
    """Branch selection for the Bessel and kernel evaluations.

    Attributes
    ----------
    series_cutoff : float
        Arguments ``x < series_cutoff`` of :math:`I_n` use the power series,
        larger ones the asymptotic expansion.
    asymptotic_terms : int
        Maximum number of terms kept in the large-argument expansion.  The sum
        is also stopped at its smallest term.
    small_tau : float
        Below this kernel argument, :math:`K` and its derivatives come from the
        Taylor series of :math:`K` itself (avoids the ``1/tau`` cancellation).
    """

    series_cutoff: float = 25.0
    asymptotic_terms: int = 60
    small_tau: float = 0.5

    def __post_init__(self):
        if not self.series_cutoff > 0:
            raise ValueError("series_cutoff must be positive")
        if self.asymptotic_terms < 1:
            raise ValueError("asymptotic_terms must be >= 1")
        if not self.small_tau > 0:
            raise ValueError("small_tau must be positive")


DEFAULT_POLICY = KernelEvalPolicy()

_MAX_ORDER = 4


def _check_order(n, upper=_MAX_ORDER, name="n"):
    if int(n) != n or not 0 <= n <= upper:
        raise ValueError(f"{name} must be an integer in 0..{upper}, got {n!r}")
    return int(n)


def _as_nonneg_array(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    if np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def _ie_series(n, x, n_terms=120):
    # e^{-x} I_n(x) = e^{-x} sum_k (x/2)^{2k+n} / (k! (k+n)!); all terms positive.
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term.copy()
    q = half * half
    for k in range(1, n_terms):
        term = term * q / (k * (k + n))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    return total * np.exp(-x)


def _ie_asymptotic(n, x, max_terms):
    # e^{-x} I_n(x) ~ (2 pi x)^{-1/2} sum_k (-1)^k a_k(n) x^{-k}
    mu = 4.0 * n * n
    total = np.ones_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, max_terms):
        term = term * (-(mu - (2 * k - 1) ** 2) / (8.0 * k * x))
        mag = np.abs(term)
        # stop each entry at its smallest term (optimal truncation)
        active &= mag < prev
        if not np.any(active):
            break
        total = np.where(active, total + term, total)
        prev = np.where(active, mag, prev)
        if np.all(mag[active] <= 1e-17):
            break
    return total / np.sqrt(2.0 * math.pi * x)


def bessel_ie(n, x, policy: KernelEvalPolicy = DEFAULT_POLICY):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_n(x)``.

    Finite for every ``x >= 0``.  ``n`` must be an integer in ``0..4``.
    """
    n = _check_order(n)
    arr = _as_nonneg_array(x, "x")
    scalar = arr.ndim == 0
    x1 = np.atleast_1d(arr)
    out = np.empty_like(x1)
    small = x1 < policy.series_cutoff
    if np.any(small):
        out[small] = _ie_series(n, x1[small])
    if np.any(~small):
        out[~small] = _ie_asymptotic(n, x1[~small], policy.asymptotic_terms)
    return float(out[0]) if scalar else out


def bessel_i(n, x, policy: KernelEvalPolicy = DEFAULT_POLICY):
    """Modified Bessel function of the first kind, integer order 0..4.

    Overflows to ``inf`` past ``x ~ 709``; use :func:`bessel_ie` there.
    """
    arr = _as_nonneg_array(x, "x")
    with np.errstate(over="ignore"):
        val = bessel_ie(n, arr, policy) * np.exp(arr)
    return float(val) if np.ndim(val) == 0 else val


# --- the kernel K -----------------------------------------------------------


@lru_cache(maxsize=None)
def _k_taylor_coefficients(n_terms=40):
    """Taylor coefficients of K at 0 (Cauchy product of exp(-t/2) and I1(t/2)/t)."""
    # I1(t/2)/t = (1/4) sum_k (t/4)^{2k} / (k! (k+1)!)
    b = np.zeros(n_terms)
    for k in range(0, (n_terms + 1) // 2):
        if 2 * k < n_terms:
            b[2 * k] = 0.25 * 0.25 ** (2 * k) / (math.factorial(k) * math.factorial(k + 1))
    a = np.array([(-0.5) ** m / math.factorial(m) for m in range(n_terms)])
    c = np.convolve(a, b)[:n_terms]
    return SQRT_PI * c


def _k_series_deriv(i, tau):
    c = _k_taylor_coefficients()
    n = len(c)
    # d^i/dtau^i sum_j c_j tau^j, Horner on the shifted coefficients
    coeffs = np.array([c[j] * math.perm(j, i) for j in range(i, n)])
    out = np.zeros_like(tau)
    for cj in coeffs[::-1]:
        out = out * tau + cj
    return out


@lru_cache(maxsize=None)
def _h_derivative_terms(i):
    """Symbolic i-th derivative of h(x) = x^{-1} e^{-x} I_1(x).

    Returned as a dict {(power, order): coefficient} meaning
    sum coefficient * x**power * e^{-x} I_order(x).  Uses
    d/dx [e^{-x} I_n] = e^{-x} I_{n+1} + (n/x - 1) e^{-x} I_n.
    """
    terms = {(-1, 1): 1.0}
    for _ in range(i):
        new = {}
        for (p, n), c in terms.items():
            for key, val in (((p - 1, n), c * (p + n)), ((p, n), -c), ((p, n + 1), c)):
                if val != 0.0:
                    new[key] = new.get(key, 0.0) + val
        terms = {k: v for k, v in new.items() if v != 0.0}
    return terms


@lru_cache(maxsize=None)
def _k_asymptotic_coefficients(n_terms=40):
    # K(tau) ~ tau^{-3/2} sum_k (-1)^k a_k(1) 2^k tau^{-k}
    coef = [1.0]
    a = 1.0
    for k in range(1, n_terms):
        a = a * (4.0 - (2 * k - 1) ** 2) / (8.0 * k)
        coef.append((-1) ** k * a * 2.0**k)
    return np.array(coef)


def _k_asymptotic_deriv(i, tau, max_terms):
    coef = _k_asymptotic_coefficients(max_terms)
    total = np.zeros_like(tau)
    prev = np.full_like(tau, np.inf)
    active = np.ones(tau.shape, dtype=bool)
    for k, ck in enumerate(coef):
        e = -1.5 - k
        fall = 1.0
        for s in range(i):
            fall *= e - s
        term = ck * fall * tau ** (e - i)
        mag = np.abs(term)
        active &= mag < prev if k > 2 else active
        if not np.any(active):
            break
        total = np.where(active, total + term, total)
        prev = np.where(active, mag, prev)
    return total


def _k_bessel_deriv(i, tau, policy):
    x = 0.5 * tau
    h = np.zeros_like(tau)
    for (p, n), c in _h_derivative_terms(i).items():
        h += c * x**p * bessel_ie(n, x, policy)
    # K(tau) = (sqrt(pi)/2) h(tau/2); chain rule gives (1/2)^i
    return 0.5 * SQRT_PI * 0.5**i * h


def kernel_k_deriv(i, tau, policy: KernelEvalPolicy = DEFAULT_POLICY):
    """i-th derivative (``i`` in 0..3) of the semigroup kernel K at ``tau >= 0``.

    Three regimes: Taylor series of K below ``policy.small_tau``, the
    closed Bessel form differentiated with the index-raising recurrence in
    the middle, and the termwise-differentiated large-argument expansion of
    K once ``tau/2`` passes the Bessel series cutoff.
    """
    i = _check_order(i, 3, "i")
    arr = _as_nonneg_array(tau, "tau")
    scalar = arr.ndim == 0
    t1 = np.atleast_1d(arr).astype(float)
    out = np.empty_like(t1)
    small = t1 < policy.small_tau
    large = 0.5 * t1 >= policy.series_cutoff
    mid = ~(small | large)
    if np.any(small):
        out[small] = _k_series_deriv(i, t1[small])
    if np.any(mid):
        out[mid] = _k_bessel_deriv(i, t1[mid], policy)
    if np.any(large):
        out[large] = _k_asymptotic_deriv(i, t1[large], policy.asymptotic_terms)
    return float(out[0]) if scalar else out


def kernel_k(tau, policy: KernelEvalPolicy = DEFAULT_POLICY):
    """Semigroup kernel ``K(tau) = sqrt(pi)/tau * exp(-tau/2) * I_1(tau/2)``.

    Positive, equal to ``sqrt(pi)/4`` at 0 and ``~ tau**-1.5`` at infinity.
    """
    return kernel_k_deriv(0, tau, policy)


def kernel_k_quadrature(tau, epsabs=0.0, epsrel=1e-13):
    """Reference value of K from its defining angular integral (slow)."""
    import warnings

    from scipy.integrate import IntegrationWarning, quad

    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0:
        return SQRT_PI / 4.0
    # integrand is even in phi; for large tau the mass sits near phi = 0
    width = min(math.pi, 40.0 / math.sqrt(tau)) if tau > 1 else math.pi
    f = lambda phi: math.exp(-tau * math.sin(0.5 * phi) ** 2) * math.cos(phi)
    with warnings.catch_warnings():
        # the requested tolerance sits at the roundoff floor on purpose
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, 0.0, width, epsabs=epsabs, epsrel=epsrel, limit=400)
        if width < math.pi:
            tail, _ = quad(f, width, math.pi, epsabs=epsabs, epsrel=epsrel, limit=400)
            val += tail
    return 2.0 * val / (tau * math.sqrt(4.0 * math.pi))


# --- misc -------------------------------------------------------------------


def beta_function(a, b):
    """Euler Beta function ``B(a, b)`` for positive arguments."""
    if not (a > 0 and b > 0):
        raise ValueError(f"Beta function needs positive arguments, got ({a}, {b})")
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def gauss_primitive(s):
    """``int_0^s exp(-sigma^2/4) dsigma = sqrt(pi) * erf(s/2)``."""
    arr = _as_nonneg_array(s, "s")
    val = SQRT_PI * special.erf(0.5 * arr)
    return float(val) if np.ndim(val) == 0 else val

"""Long-time expansion remainders and decay-rate fitting.

The two-term expansion of the vorticity is

    omega(t) = I0 t^-2 G1(./sqrt t) + J(t) t^-5/2 G2(./sqrt t) + omega_tilde(t),

and the velocity behaves like ``I0 t^-3/2 u^G1(./sqrt t) + J_inf t^-2 u^G2(./sqrt t)``.
Rates are checked empirically by least-squares fits of log-log data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .biot_savart import u_profile_field
from .grid_fields import ScalarField, VectorField, weighted_lp_norm
from .semigroup import gaussian_term

__all__ = [
    "RateFit",
    "JInfinity",
    "fit_decay_exponent",
    "fit_log_corrected",
    "remainder_first",
    "omega_tilde",
    "velocity_gap",
    "estimate_J_infinity",
    "column",
]


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through ``(ln t, ln value)``."""

    slope: float
    intercept: float
    stderr: float
    window: tuple
    n_points: int

    def predict(self, t):
        return np.exp(self.intercept) * np.asarray(t, dtype=float) ** self.slope


def fit_decay_exponent(series, window=None) -> RateFit:
    """Fit ``value ~ C t^slope`` on the points of ``series`` inside ``window``.

    ``series`` is a sequence of ``(t, value)`` pairs.  The window must hold at
    least four points and span at least one octave.
    """
    data = np.asarray(list(series), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("series must be a sequence of (t, value) pairs")
    if window is None:
        window = (data[:, 0].min(), data[:, 0].max())
    ta, tb = map(float, window)
    if not (ta > 0 and tb >= 2 * ta * (1 - 1e-12)):
        raise ValueError(f"window {window} must span at least one octave (0 < t_a, t_b >= 2 t_a)")
    eps = 1e-12 * tb
    sel = data[(data[:, 0] >= ta - eps) & (data[:, 0] <= tb + eps)]
    if len(sel) < 4:
        raise ValueError(f"need at least 4 points in {window}, got {len(sel)}")
    if np.any(sel[:, 1] <= 0) or not np.all(np.isfinite(sel[:, 1])):
        raise ValueError("values must be positive and finite for a log-log fit")
    x, y = np.log(sel[:, 0]), np.log(sel[:, 1])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    n = len(x)
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = math.sqrt(np.sum(resid**2) / (n - 2) / sxx) if n > 2 and sxx > 0 else 0.0
    return RateFit(float(coef[0]), float(coef[1]), stderr, (ta, tb), n)


def fit_log_corrected(series, window=None) -> RateFit:
    """Exponent of ``value / (1 + ln(1 + t))``, i.e. the fit of ``C (1 + ln(1+t)) t^slope``."""
    pairs = [(t, v / (1.0 + math.log1p(t))) for t, v in series]
    return fit_decay_exponent(pairs, window)


def column(records, name):
    """``(t, value)`` pairs of one :class:`~axivort.solver.MomentRecord` column."""
    return [(r.t, getattr(r, name)) for r in records]


def remainder_first(omega: ScalarField, t: float, I0: float, p: float) -> float:
    """``|| omega - I0 t^-2 G1(./sqrt t) ||_{L^p(Omega)}``."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if not t > 0:
        raise ValueError("t must be positive")
    g = gaussian_term("G1", omega.grid, t, I0)
    return weighted_lp_norm(omega - g.values, p)


def omega_tilde(omega: ScalarField, t: float, I0: float, Jt: float) -> ScalarField:
    """``omega`` minus both Gaussian expansion terms (with the instantaneous ``J(t)``)."""
    if not t > 0:
        raise ValueError("t must be positive")
    g1 = gaussian_term("G1", omega.grid, t, I0)
    g2 = gaussian_term("G2", omega.grid, t, Jt)
    return omega.with_values(omega.values - g1.values - g2.values)


def velocity_gap(u: VectorField, t: float, I0: float, Jv: float, q: float) -> float:
    """``L^q(R^3)`` norm of ``u`` minus its two-term expansion.

    Computed as ``(2 pi)^(1/q) || r^(1/q) |u - I0 t^-3/2 u^G1 - Jv t^-2 u^G2| ||_{L^q(Omega)}``;
    for ``q = inf`` the weight is dropped.  ``Jv = 0`` gives the one-term gap.
    """
    q = float(q)
    if not q > 1:
        raise ValueError("q must be > 1")
    if not t > 0:
        raise ValueError("t must be positive")
    g = u.grid
    e1 = u_profile_field("G1", g, t, I0)
    dr_ = u.ur - e1.ur
    dz_ = u.uz - e1.uz
    if Jv != 0:
        e2 = u_profile_field("G2", g, t, Jv)
        dr_ = dr_ - e2.ur
        dz_ = dz_ - e2.uz
    mag = np.hypot(dr_, dz_)
    if q == math.inf:
        return float(mag.max())
    w = g.r[:, None] ** (1.0 / q)
    f = ScalarField(g, w * mag, u.time)
    return (2.0 * math.pi) ** (1.0 / q) * weighted_lp_norm(f, q)


class JInfinity(NamedTuple):
    J_inf: float
    tail_slope: float
    c: float


def estimate_J_infinity(records: Sequence) -> JInfinity:
    """Limit of ``J(t)`` and the decay exponent of its increments.

    ``J_inf`` and ``c`` come from a least-squares fit of ``J = J_inf + c t^-1/2``
    on the last octave of records.  ``tail_slope`` is the fitted exponent of
    ``|J(2t) - J(t)|`` over the latest octave of ``t`` for which ``2t`` is also
    recorded (``nan`` when all increments vanish).
    """
    pts = sorted((float(r.t), float(r.J)) for r in records if r.t > 0)
    if len(pts) < 4:
        raise ValueError("need at least 4 records with t > 0")
    t = np.array([p[0] for p in pts])
    J = np.array([p[1] for p in pts])
    last = t[-1]
    sel = t >= 0.5 * last * (1 - 1e-12)
    if sel.sum() < 3:
        raise ValueError("the last octave must hold at least 3 records")
    A = np.column_stack([np.ones(sel.sum()), t[sel] ** -0.5])
    (J_inf, c), *_ = np.linalg.lstsq(A, J[sel], rcond=None)
    scale = max(1.0, float(np.max(np.abs(J))))
    if abs(c) <= 1e-13 * scale:
        c = 0.0
    # increments |J(2t) - J(t)|
    lookup = {round(tt, 9): jj for tt, jj in zip(t, J)}
    inc = []
    for tt, jj in zip(t, J):
        j2 = lookup.get(round(2 * tt, 9))
        if j2 is not None:
            inc.append((tt, abs(j2 - jj)))
    tail = math.nan
    if len(inc) >= 4:
        tmax = inc[-1][0]
        late = [p for p in inc if p[0] >= 0.5 * tmax * (1 - 1e-12)]
        if len(late) >= 4 and all(v > 1e-14 * scale for _, v in late):
            tail = fit_decay_exponent(late, (late[0][0], tmax)).slope
    return JInfinity(float(J_inf), tail, float(c))

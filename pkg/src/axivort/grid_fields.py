"""Half-plane grid, sampled fields, weighted norms and vorticity moments.

The domain Omega = (0, inf) x R is truncated to (0, rmax) x (-zmax, zmax)
and discretised cell-centred, so the axis r = 0 is never a node:

    r_i = (i + 1/2) dr,       i = 0 .. nr-1
    z_j = -zmax + (j + 1/2) dz,  j = 0 .. nz-1

Field values are stored as ``(nr, nz)`` arrays (first index r).  All
integrals are midpoint sums over the cells.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "WeightSpec",
    "weighted_lp_norm",
    "moment_I",
    "moment_J",
    "div_star",
    "boundary_tail",
    "write_snapshot",
    "read_snapshot",
]


@dataclass(frozen=True)
class Grid:
    """Cell-centred truncation of the half-plane."""

    nr: int
    nz: int
    rmax: float
    zmax: float

    def __post_init__(self):
        if int(self.nr) != self.nr or int(self.nz) != self.nz or self.nr < 1 or self.nz < 1:
            raise ValueError(f"nr and nz must be positive integers, got ({self.nr}, {self.nz})")
        if not (self.rmax > 0 and self.zmax > 0):
            raise ValueError("rmax and zmax must be positive")
        if not (math.isfinite(self.rmax) and math.isfinite(self.zmax)):
            raise ValueError("rmax and zmax must be finite")

    @property
    def dr(self) -> float:
        return self.rmax / self.nr

    @property
    def dz(self) -> float:
        return 2.0 * self.zmax / self.nz

    @property
    def shape(self):
        return (self.nr, self.nz)

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.dr

    @property
    def z(self) -> np.ndarray:
        return -self.zmax + (np.arange(self.nz) + 0.5) * self.dz

    @property
    def cell_area(self) -> float:
        return self.dr * self.dz

    def mesh(self):
        """Return ``(R, Z)`` node coordinates, each of shape ``(nr, nz)``."""
        return np.meshgrid(self.r, self.z, indexing="ij")

    def scaled(self, factor: float) -> "Grid":
        """Same node counts with both extents multiplied by ``factor``."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        return Grid(self.nr, self.nz, self.rmax * factor, self.zmax * factor)

    def refined(self, k: int = 2) -> "Grid":
        """Same extents with ``k`` times more cells in each direction."""
        return Grid(self.nr * k, self.nz * k, self.rmax, self.zmax)

    def sample(self, func, time: float = 0.0) -> "ScalarField":
        """Evaluate ``func(R, Z)`` at the nodes."""
        R, Z = self.mesh()
        return ScalarField(self, np.asarray(func(R, Z), dtype=float), time)


def _check_values(grid, values, name):
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"{name} has shape {values.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} contains non-finite values")
    return values


@dataclass
class ScalarField:
    """Samples of a scalar (typically the vorticity) on a grid at a time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values, "values")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.time)

    def with_values(self, values, time=None) -> "ScalarField":
        return ScalarField(self.grid, values, self.time if time is None else time)

    def __neg__(self):
        return self.with_values(-self.values)

    def __add__(self, other):
        return self.with_values(self.values + _values_of(other, self.grid))

    def __sub__(self, other):
        return self.with_values(self.values - _values_of(other, self.grid))

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _values_of(other, grid):
    if isinstance(other, ScalarField):
        if other.grid != grid:
            raise ValueError("fields live on different grids")
        return other.values
    return other


@dataclass
class VectorField:
    """Velocity-like field ``(u_r, u_z)`` on a grid."""

    grid: Grid
    ur: np.ndarray
    uz: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.ur = _check_values(self.grid, self.ur, "ur")
        self.uz = _check_values(self.grid, self.uz, "uz")
        if self.time < 0:
            raise ValueError("time must be nonnegative")

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.ur, self.uz)


@dataclass(frozen=True)
class WeightSpec:
    """A weight ``sum_k c_k r**alpha_k |z|**gamma_k``.

    The common single-term case is ``WeightSpec.power(alpha, gamma)``.
    Composite weights such as ``r**2 + r|z| + |z|`` are built with
    :meth:`composite`.
    """

    terms: tuple = ((1.0, 0.0, 0.0),)

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("weight needs at least one term")
        for c, a, g in self.terms:
            if not (-1.0 <= a <= 4.0):
                raise ValueError(f"r exponent {a} outside [-1, 4]")
            if not (0.0 <= g <= 2.0):
                raise ValueError(f"|z| exponent {g} outside [0, 2]")
            if not math.isfinite(c):
                raise ValueError("weight coefficient must be finite")

    @classmethod
    def power(cls, alpha: float = 0.0, gamma: float = 0.0) -> "WeightSpec":
        return cls(((1.0, float(alpha), float(gamma)),))

    @classmethod
    def composite(cls, *terms) -> "WeightSpec":
        """Terms given as ``(coef, alpha, gamma)`` triples."""
        return cls(tuple((float(c), float(a), float(g)) for c, a, g in terms))

    @property
    def alpha(self) -> float:
        return self.terms[0][1] if len(self.terms) == 1 else max(t[1] for t in self.terms)

    @property
    def gamma(self) -> float:
        return self.terms[0][2] if len(self.terms) == 1 else max(t[2] for t in self.terms)

    def evaluate(self, grid: Grid) -> np.ndarray:
        R, Z = grid.mesh()
        absz = np.abs(Z)
        w = np.zeros(grid.shape)
        for c, a, g in self.terms:
            w += c * R**a * (absz**g if g != 0 else 1.0)
        return w


UNIT_WEIGHT = WeightSpec.power(0.0, 0.0)


def _lp(values, area, p):
    a = np.abs(values)
    if p == math.inf:
        return float(a.max()) if a.size else 0.0
    if p == 1:
        return float(a.sum() * area)
    m = a.max()
    if m == 0:
        return 0.0
    # scale by the maximum so large p cannot overflow
    return float(m * (np.sum((a / m) ** p) * area) ** (1.0 / p))


def weighted_lp_norm(f: ScalarField, p: float, w: WeightSpec = UNIT_WEIGHT) -> float:
    """Midpoint approximation of ``||w f||_{L^p(Omega)}`` (``p = inf`` gives the max)."""
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be in [1, inf], got {p}")
    return _lp(w.evaluate(f.grid) * f.values, f.grid.cell_area, p)


def moment_I(f: ScalarField) -> float:
    """Impulse ``int r^2 f dr dz`` by the midpoint rule."""
    r = f.grid.r
    return float(np.sum((r**2)[:, None] * f.values) * f.grid.cell_area)


def moment_J(f: ScalarField) -> float:
    """Second moment ``int r^2 z f dr dz`` by the midpoint rule."""
    g = f.grid
    return float(np.sum((g.r**2)[:, None] * g.z[None, :] * f.values) * g.cell_area)


def div_star(w: VectorField) -> ScalarField:
    """Flat divergence ``d_r w_r + d_z w_z``.

    Centred differences in the interior.  At r = 0 the ghost value of
    ``w_r`` is the odd reflection (the Dirichlet condition on the axis);
    all other edges use second-order one-sided differences.
    """
    g = w.grid
    if g.nr < 4 or g.nz < 4:
        raise ValueError("div_star needs at least 4 cells in each direction")
    dwr = np.empty_like(w.ur)
    dwr[1:-1] = (w.ur[2:] - w.ur[:-2]) / (2 * g.dr)
    dwr[0] = (w.ur[1] + w.ur[0]) / (2 * g.dr)  # ghost w_r(-r0) = -w_r(r0)
    dwr[-1] = (3 * w.ur[-1] - 4 * w.ur[-2] + w.ur[-3]) / (2 * g.dr)
    dwz = np.gradient(w.uz, g.dz, axis=1, edge_order=2)
    return ScalarField(g, dwr + dwz, w.time)


def boundary_tail(f: ScalarField, w: WeightSpec = UNIT_WEIGHT, ring: int = 2) -> float:
    """Relative mass of ``|w f|`` in the outer ``ring`` cells of the box.

    A truncation diagnostic: small values mean the field is well contained.
    """
    a = np.abs(w.evaluate(f.grid) * f.values)
    total = a.sum()
    if total == 0:
        return 0.0
    mask = np.zeros(a.shape, dtype=bool)
    mask[-ring:, :] = True
    mask[:, :ring] = True
    mask[:, -ring:] = True
    return float(a[mask].sum() / total)


# --- snapshot files -----------------------------------------------------------

_HEADER = re.compile(
    r"#\s*t=(?P<t>\S+)\s+nr=(?P<nr>\d+)\s+nz=(?P<nz>\d+)\s+rmax=(?P<rmax>\S+)\s+zmax=(?P<zmax>\S+)"
)


def write_snapshot(f: ScalarField, path) -> Path:
    """Write a field as ``# t=.. nr=.. nz=.. rmax=.. zmax=..`` plus ``r z value`` rows (r fastest)."""
    g = f.grid
    path = Path(path)
    R, Z = g.mesh()
    # r fastest: iterate z in the outer loop, i.e. transpose before flattening
    rows = np.column_stack([R.T.ravel(), Z.T.ravel(), f.values.T.ravel()])
    header = f"t={f.time!r} nr={g.nr} nz={g.nz} rmax={g.rmax!r} zmax={g.zmax!r}"
    np.savetxt(path, rows, fmt="%.17g", header=header, comments="# ")
    return path


def read_snapshot(path) -> ScalarField:
    """Inverse of :func:`write_snapshot`."""
    path = Path(path)
    with open(path) as fh:
        first = fh.readline()
    m = _HEADER.match(first.strip())
    if m is None:
        raise ValueError(f"{path}: malformed snapshot header {first.strip()!r}")
    g = Grid(int(m["nr"]), int(m["nz"]), float(m["rmax"]), float(m["zmax"]))
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape != (g.nr * g.nz, 3):
        raise ValueError(f"{path}: expected {g.nr * g.nz} rows of 3 columns, got {data.shape}")
    values = data[:, 2].reshape(g.nz, g.nr).T
    return ScalarField(g, values, float(m["t"]))

"""Discrete complex fields: grids, quadrature, norms, and derivative operators.

Two grid flavours:

* ``cartesian`` -- 1-D periodic grid on [-R, R], spectral derivatives.  The
  period is ``num_points * spacing`` so both endpoints are genuine grid
  points; quadrature uses the uniform (periodic-trapezoid) weight, which
  makes the discrete Parseval identity exact.
* ``radial``    -- r in [0, R] for radially symmetric fields in dimension
  N = 1..5, second-order finite differences with the radial operator
  d_rr + (N-1)/r d_r and a Neumann condition at the origin; quadrature is
  the trapezoid rule against the surface-weighted measure S_{N-1} r^{N-1} dr.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "NormReport",
    "sphere_area",
    "lp_norm",
    "weighted_l2_norm",
    "gradient",
    "laplacian",
    "norm_report",
    "power_diff_bound_check",
    "field_to_csv",
    "field_from_csv",
]

CARTESIAN = "cartesian"
RADIAL = "radial"


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in R^N (2 for N=1, 4*pi for N=3, ...)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class Grid:
    """Sampling grid for one complex field."""

    mode: str
    N: int
    num_points: int
    radius: float

    def __post_init__(self):
        if self.mode not in (CARTESIAN, RADIAL):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.mode == CARTESIAN and self.N != 1:
            raise ValueError("cartesian grids are 1-D only; use radial for N >= 2")
        if self.N not in (1, 2, 3, 4, 5):
            raise ValueError(f"dimension N must be in 1..5, got {self.N}")
        if self.num_points < 16:
            raise ValueError("need at least 16 grid points")
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def spacing(self) -> float:
        width = 2.0 * self.radius if self.mode == CARTESIAN else self.radius
        return width / (self.num_points - 1)

    @cached_property
    def coords(self) -> np.ndarray:
        """Cartesian coordinates in [-R, R] or radii in [0, R]."""
        if self.mode == CARTESIAN:
            return np.linspace(-self.radius, self.radius, self.num_points)
        return np.linspace(0.0, self.radius, self.num_points)

    @cached_property
    def radii(self) -> np.ndarray:
        """|x| at every grid point."""
        return np.abs(self.coords) if self.mode == CARTESIAN else self.coords

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        if self.mode != CARTESIAN:
            raise ValueError("wavenumbers only exist on cartesian (spectral) grids")
        return 2.0 * math.pi * np.fft.fftfreq(self.num_points, d=self.spacing)

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Quadrature weights: integral f ~= sum(w * f)."""
        h = self.spacing
        if self.mode == CARTESIAN:
            return np.full(self.num_points, h)
        w = np.full(self.num_points, h)
        w[0] = w[-1] = 0.5 * h
        return w * sphere_area(self.N) * self.radii ** (self.N - 1)

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "N": self.N,
            "num_points": self.num_points,
            "radius": self.radius,
            "spacing": self.spacing,
        }


@dataclass(frozen=True)
class Field:
    """Complex samples on a grid, tagged with the time they belong to."""

    grid: Grid
    values: np.ndarray
    time_tag: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid.num_points,):
            raise ValueError(
                f"values shape {v.shape} does not match grid ({self.grid.num_points},)"
            )

    def with_values(self, values: np.ndarray, time_tag: float | None = None) -> "Field":
        return Field(self.grid, values, self.time_tag if time_tag is None else time_tag)

    def check_finite(self):
        if not np.all(np.isfinite(self.values.view(np.float64))):
            raise FloatingPointError(
                f"field at t={self.time_tag} contains non-finite values"
            )
        return self


@dataclass(frozen=True)
class NormReport:
    """All norms of one field at one time.

    The quadratic identities h1^2 = l2^2 + h1_dot^2 and
    sigma^2 = h1^2 + weighted_l2^2 hold by construction.
    """

    l2: float
    h1_dot: float
    h1: float
    l_alpha_plus_2: float
    sigma: float
    weighted_l2: float
    time_tag: float

    @classmethod
    def from_parts(cls, l2, h1_dot, l_alpha_plus_2, weighted_l2, time_tag):
        h1 = math.hypot(l2, h1_dot)
        return cls(
            l2=l2,
            h1_dot=h1_dot,
            h1=h1,
            l_alpha_plus_2=l_alpha_plus_2,
            sigma=math.hypot(h1, weighted_l2),
            weighted_l2=weighted_l2,
            time_tag=time_tag,
        )

    def to_dict(self) -> dict:
        return {
            "time_tag": self.time_tag,
            "l2": self.l2,
            "h1_dot": self.h1_dot,
            "h1": self.h1,
            "l_alpha_plus_2": self.l_alpha_plus_2,
            "sigma": self.sigma,
            "weighted_l2": self.weighted_l2,
        }


def lp_norm(f: Field, p: float) -> float:
    """L^p norm with the grid's quadrature weight; p = inf is the max modulus."""
    if not 1.0 <= p:
        raise ValueError(f"p must be in [1, inf], got {p}")
    mod = np.abs(f.values)
    if p == math.inf:
        return float(mod.max())
    return float(np.sum(f.grid.quad_weights * mod**p) ** (1.0 / p))


def weighted_l2_norm(f: Field) -> float:
    """|| |x| f ||_{L^2}."""
    mod2 = np.abs(f.values) ** 2
    return float(math.sqrt(np.sum(f.grid.quad_weights * f.grid.radii**2 * mod2)))


def gradient(f: Field) -> Field:
    """Spatial derivative: spectral d_x (cartesian) or second-order d_r (radial).

    For radial fields the returned samples are the radial derivative, which is
    the full gradient magnitude up to sign; d_r f(0) = 0 is imposed.
    """
    g = f.grid
    if g.mode == CARTESIAN:
        out = np.fft.ifft(1j * g.wavenumbers * np.fft.fft(f.values))
        return f.with_values(out)
    h = g.spacing
    v = f.values
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = 0.0
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return f.with_values(out)


def laplacian(f: Field) -> Field:
    """Laplacian: spectral -|k|^2 (cartesian) or d_rr + (N-1)/r d_r (radial)."""
    g = f.grid
    if g.mode == CARTESIAN:
        out = np.fft.ifft(-(g.wavenumbers**2) * np.fft.fft(f.values))
        return f.with_values(out)
    h = g.spacing
    N = g.N
    v = f.values
    r = g.coords
    out = np.empty_like(v)
    # interior: standard second-order stencils for f'' and f'
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h**2 + (N - 1) / r[1:-1] * (
        v[2:] - v[:-2]
    ) / (2.0 * h)
    # origin: d_r f(0) = 0 makes the limit N * f''(0); ghost point f(-h) = f(h)
    out[0] = 2.0 * N * (v[1] - v[0]) / h**2
    # outer edge: one-sided second-order stencils
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h**2 + (N - 1) / r[
        -1
    ] * (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return f.with_values(out)


def norm_report(f: Field, alpha: float) -> NormReport:
    """L2, H1-dot, H1, L^{alpha+2}, Sigma, and weighted-L2 norms in one pass."""
    return NormReport.from_parts(
        l2=lp_norm(f, 2.0),
        h1_dot=lp_norm(gradient(f), 2.0),
        l_alpha_plus_2=lp_norm(f, alpha + 2.0),
        weighted_l2=weighted_l2_norm(f),
        time_tag=f.time_tag,
    )


def _signed_power(z: np.ndarray, p: float, n: int) -> np.ndarray:
    """|z|^{p-n} z^n, extended by 0 at z = 0 (total power p > 0)."""
    z = np.asarray(z, dtype=np.complex128)
    mod = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = mod ** (p - n) * z**n
    return np.where(mod == 0.0, 0.0, out)


def power_diff_bound_check(z, w, p: float, n: int):
    """Difference of power nonlinearities against its two candidate majorants.

    Returns ``(lhs, (maj_lipschitz, maj_hoelder))`` where
    ``lhs = | |z|^{p-n} z^n - |w|^{p-n} w^n |``,
    ``maj_lipschitz = (|z|^{p-1} + |w|^{p-1}) |z - w|`` (the p >= 1 bound) and
    ``maj_hoelder = |z - w|^p`` (the 0 < p <= 1 bound).  Vectorized; property
    tests fit the implicit constants empirically over random samples.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if n not in (0, 1, 2):
        raise ValueError("n must be 0, 1, or 2")
    z = np.asarray(z, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    lhs = np.abs(_signed_power(z, p, n) - _signed_power(w, p, n))
    az, aw = np.abs(z), np.abs(w)
    with np.errstate(divide="ignore"):
        maj_lip = (az ** (p - 1.0) + aw ** (p - 1.0)) * np.abs(z - w)
    maj_hoe = np.abs(z - w) ** p
    return lhs, (maj_lip, maj_hoe)


def field_to_csv(f: Field, path):
    """Write a snapshot as rows of (coordinate, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["coordinate", "re", "im"])
        for x, v in zip(f.grid.coords, f.values):
            writer.writerow([f"{x:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])


def field_from_csv(path, grid: Grid, time_tag: float = 0.0) -> Field:
    """Read a snapshot written by :func:`field_to_csv` back onto its grid."""
    re, im = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            re.append(float(row[1]))
            im.append(float(row[2]))
    return Field(grid, np.asarray(re) + 1j * np.asarray(im), time_tag)

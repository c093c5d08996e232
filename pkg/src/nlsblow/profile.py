"""Exact blow-up profile: pointwise evaluation, derivatives, norms, scaling fits.

The profile is ``U(t, x) = s^c`` with

* ``s = alpha * Im(lam) * (|x|^k - t) > 0`` for ``t < 0``,
* ``c = -1/alpha + i Re(lam) / (alpha Im(lam))``,

taking the principal branch (``s`` is a positive real, so ``s^c`` is
single-valued and ``|U| = s^{-1/alpha}`` exactly).  ``U`` solves the pointwise
ODE ``i U_t = lam |U|^alpha U`` for every ``x``, blows up at ``t = 0`` at the
origin, and all of its norms are exact power laws in ``(-t)`` by
self-similarity.  Spatial derivative formulas assume an even integer ``k``
(smoothness of ``|x|^k`` at the origin).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .field import Field, Grid, RADIAL, sphere_area
from .params import ExponentTable, PhysParams, exponent_table

__all__ = [
    "ScalingFit",
    "profile_value",
    "profile_time_derivative",
    "profile_radial_derivative",
    "profile_gradient",
    "profile_laplacian",
    "profile_grad_laplacian",
    "profile_ode_residual",
    "profile_field",
    "profile_norm",
    "make_profile_grid",
    "verify_scaling",
    "SCALING_QUANTITIES",
]

# quantity name -> decay exponent of the sampled function, |f| ~ r^(e - k/alpha)
# as r -> inf (e is the extra decay relative to |U| itself)
SCALING_QUANTITIES = {
    "lp": 0.0,
    "grad_lp": -1.0,
    "lap_l2": -2.0,
    "gradlap_l2": -3.0,
    "weighted_lap_l2": -1.0,
}


def _check_time(t: float):
    if not t < 0:
        raise ValueError(f"profile is only defined for t < 0, got t={t}")


def _s(p: PhysParams, t: float, r) -> np.ndarray:
    if not p.im_lam > 0:
        raise ValueError("profile needs Im(lam) > 0")
    return p.alpha * p.im_lam * (np.asarray(r, dtype=float) ** p.k - t)


def _c(p: PhysParams) -> complex:
    return complex(-1.0 / p.alpha, p.re_lam / (p.alpha * p.im_lam))


def profile_value(p: PhysParams, t: float, r) -> np.ndarray:
    """U(t, x) as a function of the radius r = |x| (vectorized)."""
    _check_time(t)
    return np.exp(_c(p) * np.log(_s(p, t, r)))


def profile_time_derivative(p: PhysParams, t: float, r) -> np.ndarray:
    """d_t U = -i lam s^{c-1}, analytic."""
    _check_time(t)
    s = _s(p, t, r)
    return -1j * p.lam * np.exp((_c(p) - 1.0) * np.log(s))


def profile_radial_derivative(p: PhysParams, t: float, r) -> np.ndarray:
    """d_r U = c s^{c-1} * alpha Im(lam) k r^{k-1}."""
    _check_time(t)
    r = np.asarray(r, dtype=float)
    s = _s(p, t, r)
    c = _c(p)
    return c * np.exp((c - 1.0) * np.log(s)) * p.alpha * p.im_lam * p.k * r ** (p.k - 1.0)


def profile_gradient(p: PhysParams, t: float, x) -> np.ndarray:
    """Full gradient vector at a single point x in R^N (parallel to x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    r = float(np.linalg.norm(x))
    if r == 0.0:
        return np.zeros(x.shape, dtype=np.complex128)
    return profile_radial_derivative(p, t, r) * x / r


def profile_laplacian(p: PhysParams, t: float, r, N: int | None = None) -> np.ndarray:
    """Lap(U) = c s^{c-1} Lap(s) + c(c-1) s^{c-2} |grad s|^2, analytic."""
    _check_time(t)
    N = p.N if N is None else N
    r = np.asarray(r, dtype=float)
    s = _s(p, t, r)
    c = _c(p)
    ab_k = p.alpha * p.im_lam * p.k
    grad_s = ab_k * r ** (p.k - 1.0)
    lap_s = ab_k * (p.k + N - 2.0) * r ** (p.k - 2.0)
    return np.exp((c - 2.0) * np.log(s)) * (c * s * lap_s + c * (c - 1.0) * grad_s**2)


def profile_grad_laplacian(p: PhysParams, t: float, r, N: int | None = None) -> np.ndarray:
    """d_r Lap(U), analytic; vanishes at r = 0 for even k."""
    _check_time(t)
    N = p.N if N is None else N
    r = np.asarray(r, dtype=float)
    s = _s(p, t, r)
    c = _c(p)
    ab_k = p.alpha * p.im_lam * p.k
    phi = ab_k * r ** (p.k - 1.0)          # d_r s
    g = ab_k * (p.k + N - 2.0) * r ** (p.k - 2.0)  # Lap(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        g_r = ab_k * (p.k + N - 2.0) * (p.k - 2.0) * r ** (p.k - 3.0)
        phi_r = ab_k * (p.k - 1.0) * r ** (p.k - 2.0)
        out = np.exp((c - 3.0) * np.log(s)) * (
            c * (c - 1.0) * s * phi * g
            + c * s**2 * g_r
            + c * (c - 1.0) * (c - 2.0) * phi**3
            + 2.0 * c * (c - 1.0) * s * phi * phi_r
        )
    return np.where(r == 0.0, 0.0 + 0.0j, out)


def profile_ode_residual(p: PhysParams, t: float, r, relative: bool = False):
    """|i U_t - lam |U|^alpha U|, optionally relative to |lam| |U|^{alpha+1}.

    The identity holds exactly in exact arithmetic, so the result measures
    floating-point roundoff only.
    """
    _check_time(t)
    u = profile_value(p, t, r)
    ut = profile_time_derivative(p, t, r)
    res = np.abs(1j * ut - p.lam * np.abs(u) ** p.alpha * u)
    if relative:
        return res / (abs(p.lam) * np.abs(u) ** (p.alpha + 1.0))
    return res


def profile_field(p: PhysParams, t: float, grid: Grid) -> Field:
    """Sample U(t, .) on a grid (cartesian grids use |x|; U is even)."""
    return Field(grid, profile_value(p, t, grid.radii), time_tag=t)


def _sample_quantity(p: PhysParams, t: float, r, quantity: str) -> np.ndarray:
    if quantity == "lp":
        return np.abs(profile_value(p, t, r))
    if quantity == "grad_lp":
        return np.abs(profile_radial_derivative(p, t, r))
    if quantity == "lap_l2":
        return np.abs(profile_laplacian(p, t, r))
    if quantity == "gradlap_l2":
        return np.abs(profile_grad_laplacian(p, t, r))
    if quantity == "weighted_lap_l2":
        return (1.0 + np.asarray(r, dtype=float)) * np.abs(profile_laplacian(p, t, r))
    raise ValueError(f"unknown profile quantity {quantity!r}")


def _tail_power(p: PhysParams, lp: float, quantity: str) -> float:
    """Power of r in the L^p quadrature tail integrand r^{N-1} |f|^p."""
    e_f = -p.k / p.alpha + SCALING_QUANTITIES[quantity]
    return lp * e_f + p.N


def make_profile_grid(
    p: PhysParams,
    t_list,
    lp: float = 2.0,
    quantity: str = "lp",
    points_per_scale: int = 64,
    tail_tol: float = 1e-8,
    max_points: int = 400_000,
) -> Grid:
    """Radial grid resolving U over all times in t_list with a negligible tail.

    The domain radius makes the analytic tail bound of the quadrature smaller
    than ``tail_tol`` relative to the bulk; the spacing resolves the profile's
    sharpest scale ``(-t)^{1/k}`` with ``points_per_scale`` points.
    """
    t_arr = np.asarray(list(t_list), dtype=float)
    if np.any(t_arr >= 0):
        raise ValueError("all times must be negative")
    scale_min = (-t_arr.max()) ** (1.0 / p.k)   # sharpest feature
    scale_max = (-t_arr.min()) ** (1.0 / p.k)   # widest extent
    if lp == math.inf:
        radius = 6.0 * scale_max
    else:
        beta = _tail_power(p, lp, quantity)
        if beta >= 0.0:
            raise ValueError(
                f"non-integrable tail: L^{lp} of {quantity} needs "
                f"{lp} * (k/alpha - {-SCALING_QUANTITIES[quantity]}) > {p.N}"
            )
        radius = max(6.0 * scale_max, scale_max * tail_tol ** (1.0 / beta))
    spacing = scale_min / points_per_scale
    num_points = min(max_points, int(math.ceil(radius / spacing)) + 1)
    return Grid(mode=RADIAL, N=p.N, num_points=max(num_points, 16), radius=radius)


def profile_norm(
    p: PhysParams,
    t: float,
    lp: float = 2.0,
    grid: Grid | None = None,
    quantity: str = "lp",
) -> float:
    """L^p norm of a profile quantity at time t by quadrature on a radial grid.

    ``lp = inf`` returns the max over the grid (for ``quantity='lp'`` that is
    the exact supremum, attained at the origin).  Raises when the algebraic
    tail is non-integrable for the requested (lp, quantity).
    """
    _check_time(t)
    if lp != math.inf and _tail_power(p, lp, quantity) >= 0.0:
        raise ValueError(
            f"non-integrable tail for L^{lp} of {quantity} at k={p.k}, "
            f"N={p.N}, alpha={p.alpha}"
        )
    if grid is None:
        grid = make_profile_grid(p, [t], lp=lp, quantity=quantity)
    vals = _sample_quantity(p, t, grid.radii, quantity)
    if lp == math.inf:
        return float(vals.max())
    return float(np.sum(grid.quad_weights * vals**lp) ** (1.0 / lp))


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares slope of log(norm) against log(-t) for one quantity."""

    quantity: str
    p: float
    fitted_slope: float
    predicted_slope: float
    residual: float
    times: np.ndarray
    norms: np.ndarray
    fitted_curve: np.ndarray
    predicted_curve: np.ndarray

    def to_csv(self, path):
        """Plot-ready table with one row per sampled time."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "norm", "predicted", "fitted"])
            for row in zip(self.times, self.norms, self.predicted_curve, self.fitted_curve):
                writer.writerow([f"{v:.12g}" for v in row])


def predicted_slope(table: ExponentTable, quantity: str, lp: float) -> float:
    """Closed-form log-log slope for one profile quantity."""
    if quantity == "lp":
        return table.profile_lp(lp)
    if quantity == "grad_lp":
        return table.profile_grad_lp(lp)
    if quantity == "lap_l2":
        return table.profile_lap_l2
    if quantity == "gradlap_l2":
        return table.profile_gradlap_l2
    if quantity == "weighted_lap_l2":
        # the weight costs at most one power of the spatial scale; for small
        # (-t) the unweighted laplacian slope dominates
        return table.profile_lap_l2
    raise ValueError(f"unknown profile quantity {quantity!r}")


def verify_scaling(
    p: PhysParams,
    quantity: str,
    t_list,
    lp: float = 2.0,
    grid: Grid | None = None,
) -> ScalingFit:
    """Fit the power law of one profile norm over t_list and compare.

    ``t_list`` should span at least a decade of (-t), all small enough that
    the small-time regime applies for the weighted quantity.  L^2 is forced
    for the laplacian-based quantities.
    """
    if quantity in ("lap_l2", "gradlap_l2", "weighted_lap_l2"):
        lp = 2.0
    t_arr = np.sort(np.asarray(list(t_list), dtype=float))
    if grid is None:
        grid = make_profile_grid(p, t_arr, lp=lp, quantity=quantity)
    norms = np.array([profile_norm(p, t, lp=lp, grid=grid, quantity=quantity) for t in t_arr])
    if not np.all(np.isfinite(norms)) or np.any(norms <= 0):
        raise FloatingPointError(f"non-finite {quantity} norms, cannot fit")
    logt = np.log(-t_arr)
    logn = np.log(norms)
    slope, intercept = np.polyfit(logt, logn, 1)
    fitted_curve = np.exp(intercept + slope * logt)
    pred = predicted_slope(exponent_table(p), quantity, lp)
    anchor = logn.mean() - pred * logt.mean()
    return ScalingFit(
        quantity=quantity,
        p=lp,
        fitted_slope=float(slope),
        predicted_slope=float(pred),
        residual=float(np.max(np.abs(logn - (intercept + slope * logt)))),
        times=t_arr,
        norms=norms,
        fitted_curve=fitted_curve,
        predicted_curve=np.exp(anchor + pred * logt),
    )

"""Split-step time integration of i u_t + Lap(u) = lam |u|^alpha u.

Both substeps are exact flows:

* the nonlinear substep integrates the pointwise ODE ``i u_t = lam |u|^alpha u``
  in closed form (modulus and phase separately);
* the linear substep applies the exact dispersive multiplier in Fourier space
  (cartesian grids) or an unconditionally stable Crank-Nicolson step with a
  conservation-form radial laplacian (radial grids).

Strang composition (linear half, nonlinear full, linear half) is second order.
For ``Im(lam) > 0`` the primary use is backward integration, where the
nonlinear flow is pointwise contractive and every step is well defined; a
forward step is rejected wherever it would cross the pointwise blow-up time.

An optional viscosity ``eps >= 0`` multiplies the dispersion as ``(1 - i eps)``
on forward steps; the dissipative modulus is applied with ``|dt|`` so that the
term damps for either marching direction (a pure stabilizer, default off).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import solve_banded

from .field import CARTESIAN, Field, NormReport, gradient, lp_norm, norm_report
from .params import PhysParams

__all__ = [
    "SolveConfig",
    "TrajectoryRecord",
    "CriticalBoundReport",
    "SolverBlowupError",
    "nonlinear_substep",
    "linear_substep",
    "evolve",
    "charge_identity_residual",
    "gradient_monotonicity_check",
    "critical_spacetime_bound",
    "trajectory_to_csv",
]

SCHEMES = ("strang", "lie", "ode-only")


class SolverBlowupError(RuntimeError):
    """A field left the representable range (pointwise blow-up or overflow)."""


@dataclass(frozen=True)
class SolveConfig:
    """One evolution run: window, step size, scheme, diagnostics cadence."""

    dt: float
    t_start: float
    t_end: float
    scheme: str = "strang"
    viscosity_eps: float = 0.0
    diag_every: int = 1
    store_fields: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive (direction comes from t_start/t_end)")
        if self.t_end == self.t_start:
            raise ValueError("empty time window")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.viscosity_eps < 0:
            raise ValueError("viscosity_eps must be >= 0")
        if self.diag_every < 1:
            raise ValueError("diag_every must be >= 1")

    @property
    def backward(self) -> bool:
        return self.t_end < self.t_start


def nonlinear_substep(f: Field, p: PhysParams, dt_sub: float) -> Field:
    """Exact pointwise flow of i u_t = lam |u|^alpha u over dt_sub.

    With u = rho e^{i theta}: rho' = Im(lam) rho^{alpha+1} integrates to
    rho(dt) = rho0 (1 - alpha Im(lam) dt rho0^alpha)^{-1/alpha} and
    theta' = -Re(lam) rho^alpha integrates to
    theta(dt) = theta0 + Re(lam)/(alpha Im(lam)) * log(1 - alpha Im(lam) dt rho0^alpha).
    Backward steps (dt_sub < 0, Im(lam) > 0) are always defined; forward steps
    that reach the pointwise blow-up time are rejected.
    """
    a, b, al = p.re_lam, p.im_lam, p.alpha
    u = f.values
    mod_pow = np.abs(u) ** al
    if b == 0.0:
        return f.with_values(u * np.exp(-1j * a * mod_pow * dt_sub))
    w = 1.0 - al * b * dt_sub * mod_pow
    if np.any(w <= 0.0):
        raise SolverBlowupError(
            f"nonlinear substep of {dt_sub} crosses the pointwise blow-up time "
            f"at t={f.time_tag}"
        )
    logw = np.log(w)
    return f.with_values(u * np.exp((-1.0 / al + 1j * a / (al * b)) * logw))


def _radial_laplacian_bands(grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal conservation-form radial laplacian (self-adjoint, <= 0).

    Finite-volume fluxes r_{i+1/2}^{N-1} (u_{i+1} - u_i)/h with cell volumes
    r_i^{N-1} h; the origin cell uses the Neumann condition, the outer cell a
    homogeneous Dirichlet ghost.  Second-order for smooth even fields.
    """
    h = grid.spacing
    N = grid.N
    r = grid.coords
    m = grid.num_points
    sup = np.zeros(m)
    diag = np.zeros(m)
    sub = np.zeros(m)
    diag[0] = -2.0 * N / h**2
    sup[0] = 2.0 * N / h**2
    rm = (r[1:] - 0.5 * h) ** (N - 1)
    rp = (r[1:] + 0.5 * h) ** (N - 1)
    vol = r[1:] ** (N - 1) * h**2
    sub[1:] = rm / vol
    sup[1:] = rp / vol
    sup[-1] = 0.0  # Dirichlet ghost beyond R
    diag[1:] = -(rm + rp) / vol
    return sub, diag, sup


def linear_substep(f: Field, dt_sub: float, viscosity_eps: float = 0.0) -> Field:
    """Exact (spectral) or Crank-Nicolson (radial) flow of the dispersive part.

    At ``viscosity_eps = 0`` the cartesian step multiplies each mode by
    ``exp(-i k^2 dt)`` and is an exact L2 isometry; the radial step is a
    Cayley transform of a self-adjoint operator, unconditionally stable.
    """
    if dt_sub == 0.0:
        return f
    g = f.grid
    if g.mode == CARTESIAN:
        k2 = g.wavenumbers**2
        mult = np.exp(-1j * k2 * dt_sub - viscosity_eps * k2 * abs(dt_sub))
        return f.with_values(np.fft.ifft(mult * np.fft.fft(f.values)))
    sub, diag, sup = _radial_laplacian_bands(g)
    zeta = 1j + viscosity_eps * math.copysign(1.0, dt_sub)
    coef = 0.5 * dt_sub * zeta
    m = g.num_points
    ab = np.zeros((3, m), dtype=np.complex128)
    ab[0, 1:] = -coef * sup[:-1]
    ab[1, :] = 1.0 - coef * diag
    ab[2, :-1] = -coef * sub[1:]
    rhs = f.values.copy()
    rhs[1:-1] += coef * (
        sub[1:-1] * f.values[:-2] + diag[1:-1] * f.values[1:-1] + sup[1:-1] * f.values[2:]
    )
    rhs[0] += coef * (diag[0] * f.values[0] + sup[0] * f.values[1])
    rhs[-1] += coef * (sub[-1] * f.values[-2] + diag[-1] * f.values[-1])
    return f.with_values(solve_banded((1, 1), ab, rhs))


def _one_step(f: Field, p: PhysParams, dt: float, scheme: str, eps: float) -> Field:
    if scheme == "strang":
        f = linear_substep(f, 0.5 * dt, eps)
        f = nonlinear_substep(f, p, dt)
        return linear_substep(f, 0.5 * dt, eps)
    if scheme == "lie":
        f = linear_substep(f, dt, eps)
        return nonlinear_substep(f, p, dt)
    return nonlinear_substep(f, p, dt)  # ode-only: diagnostic mode, no dispersion


@dataclass
class TrajectoryRecord:
    """Time series of norms and diagnostics for one evolution run."""

    params: PhysParams
    times: np.ndarray
    norms: list[NormReport]
    charge_identity_residual: np.ndarray
    gradient_monotone_ok: np.ndarray
    final_field: Field
    dt: float
    fields: list[Field] | None = dc_field(default=None, repr=False)

    def norm_series(self, attr: str) -> np.ndarray:
        return np.array([getattr(n, attr) for n in self.norms])


def evolve(f0: Field, p: PhysParams, cfg: SolveConfig) -> TrajectoryRecord:
    """March f0 from t_start to t_end, recording diagnostics every diag_every steps.

    Aborts with :class:`SolverBlowupError` if any recorded norm is non-finite.
    """
    f0.check_finite()
    span = cfg.t_end - cfg.t_start
    nsteps = max(1, round(abs(span) / cfg.dt))
    dt = span / nsteps
    f = f0.with_values(f0.values, time_tag=cfg.t_start)

    times = [cfg.t_start]
    reports = [norm_report(f, p.alpha)]
    fields = [f] if cfg.store_fields else None
    for step in range(1, nsteps + 1):
        f = _one_step(f, p, dt, cfg.scheme, cfg.viscosity_eps)
        t = cfg.t_start + step * dt
        f = f.with_values(f.values, time_tag=t)
        if step % cfg.diag_every == 0 or step == nsteps:
            f.check_finite()
            rep = norm_report(f, p.alpha)
            if not all(map(math.isfinite, (rep.l2, rep.h1_dot, rep.sigma))):
                raise SolverBlowupError(f"non-finite norm at t={t}")
            times.append(t)
            reports.append(rep)
            if fields is not None:
                fields.append(f)

    traj = TrajectoryRecord(
        params=p,
        times=np.asarray(times),
        norms=reports,
        charge_identity_residual=np.array([]),
        gradient_monotone_ok=np.array([], dtype=bool),
        final_field=f,
        dt=abs(dt),
        fields=fields,
    )
    if len(times) >= 3:
        traj.charge_identity_residual = charge_identity_residual(traj)
    else:
        traj.charge_identity_residual = np.full(len(times), np.nan)
    traj.gradient_monotone_ok = gradient_monotonicity_check(traj)
    return traj


def charge_identity_residual(traj: TrajectoryRecord) -> np.ndarray:
    """Discrepancy in d/dt ||u||^2 / 2 = Im(lam) ||u||_{alpha+2}^{alpha+2}.

    Finite differences in time (second order, one-sided at the ends),
    normalized by the identity's right-hand side when Im(lam) > 0; for real
    lam the raw drift rate of the charge is returned relative to the charge
    itself (conservation check).
    """
    if len(traj.times) < 3:
        raise ValueError("need at least 3 recorded times")
    l2 = traj.norm_series("l2")
    charge_rate = np.gradient(0.5 * l2**2, traj.times, edge_order=2)
    b = traj.params.im_lam
    if b == 0.0:
        return np.abs(charge_rate) / np.maximum(0.5 * l2**2, np.finfo(float).tiny)
    rhs = b * traj.norm_series("l_alpha_plus_2") ** (traj.params.alpha + 2.0)
    return np.abs(charge_rate - rhs) / np.maximum(rhs, np.finfo(float).tiny)


def gradient_monotonicity_check(traj: TrajectoryRecord, tol_factor: float = 10.0) -> np.ndarray:
    """Flags for the one-sided gradient monotonicity, step by step.

    Forward in time the gradient norm grows (when (alpha+2) Im(lam) >=
    alpha |lam|), so along decreasing times it must not increase beyond an
    O(dt^2)-sized tolerance; forward runs are checked with the mirrored
    inequality.  The first flag is vacuously true.
    """
    g = traj.norm_series("h1_dot")
    tol = tol_factor * traj.dt**2 * max(g.max(), 1.0)
    flags = np.ones(len(g), dtype=bool)
    diffs = np.diff(g)
    if len(traj.times) > 1 and traj.times[-1] < traj.times[0]:
        flags[1:] = diffs <= tol
    else:
        flags[1:] = diffs >= -tol
    return flags


@dataclass(frozen=True)
class CriticalBoundReport:
    """Space-time integral against the gradient-drop bound, critical power."""

    spacetime_integral: float
    bound: float
    lebesgue_exponent: float

    @property
    def ratio(self) -> float:
        return self.spacetime_integral / self.bound

    def holds(self, tolerance: float = 0.05) -> bool:
        return self.spacetime_integral <= self.bound * (1.0 + tolerance)


def critical_spacetime_bound(traj: TrajectoryRecord) -> CriticalBoundReport:
    """Check the critical-power space-time estimate on a recorded trajectory.

    Needs N >= 3, alpha = 4/(N-2), the strict coefficient inequality, and
    stored field snapshots.  Integrates ||u(t)||_{L^q}^{alpha+2} with
    q = N(alpha+2)/(N-2) over the recorded window and compares with
    (||grad u(t_hi)||^2 - ||grad u(t_lo)||^2) / ((alpha+2) Im(lam) - alpha |lam|).
    """
    p = traj.params
    if p.N < 3 or not math.isclose(p.alpha, 4.0 / (p.N - 2), rel_tol=1e-9):
        raise ValueError("critical-power bound needs N >= 3 and alpha = 4/(N-2)")
    kappa = (p.alpha + 2.0) * p.im_lam - p.alpha * abs(p.lam)
    if not kappa > 0:
        raise ValueError("critical-power bound needs the strict coefficient inequality")
    if traj.fields is None:
        raise ValueError("run evolve with store_fields=True for the space-time norm")
    q = p.N * (p.alpha + 2.0) / (p.N - 2.0)
    order = np.argsort(traj.times)
    t_sorted = traj.times[order]
    vals = np.array([lp_norm(traj.fields[i], q) ** (p.alpha + 2.0) for i in order])
    integral = float(np.trapezoid(vals, t_sorted))
    g = traj.norm_series("h1_dot")[order]
    return CriticalBoundReport(
        spacetime_integral=integral,
        bound=float((g[-1] ** 2 - g[0] ** 2) / kappa),
        lebesgue_exponent=q,
    )


def trajectory_to_csv(traj: TrajectoryRecord, path):
    """Stream the recorded norm series and diagnostics to CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "t",
                "l2",
                "h1_dot",
                "h1",
                "l_alpha_plus_2",
                "sigma",
                "weighted_l2",
                "charge_residual",
                "grad_monotone_ok",
            ]
        )
        for i, rep in enumerate(traj.norms):
            writer.writerow(
                [
                    f"{traj.times[i]:.12g}",
                    f"{rep.l2:.12g}",
                    f"{rep.h1_dot:.12g}",
                    f"{rep.h1:.12g}",
                    f"{rep.l_alpha_plus_2:.12g}",
                    f"{rep.sigma:.12g}",
                    f"{rep.weighted_l2:.12g}",
                    f"{traj.charge_identity_residual[i]:.12g}",
                    int(traj.gradient_monotone_ok[i]),
                ]
            )

"""Backward Cauchy runs from profile data and the rate/compactness diagnostics.

For each n in a list, the solver is started at ``T_n = -1/n`` from the exact
profile and marched backward over a window of length ``delta``.  The
difference ``eps_n(t) = u_n(t) - U(t)`` starts at exactly zero and its norms
are fitted against powers of the elapsed window time ``T_n - t``; the
time-reversed fields ``eta_n(tau) = eps_n(T_n - tau)`` feed a Cauchy-gap
diagnostic that stands in for a compactness argument at the discrete level.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import CARTESIAN, Field, Grid, NormReport, lp_norm, norm_report
from .params import ExponentTable, PhysParams, exponent_table, validate_assumptions
from .profile import (
    profile_field,
    profile_radial_derivative,
    profile_value,
    verify_scaling,
)
from .solver import (
    CriticalBoundReport,
    SolveConfig,
    TrajectoryRecord,
    critical_spacetime_bound,
    evolve,
)

__all__ = [
    "StudyConfig",
    "EpsilonTrajectory",
    "RateFit",
    "CauchyDiagnostic",
    "StudyReport",
    "run_epsilon_trajectory",
    "run_all_trajectories",
    "fit_rates",
    "cauchy_diagnostic",
    "uniform_delta_probe",
    "prefactor_spread",
    "strang_convergence_ratio",
    "blowup_report",
    "WORKERS_ENV",
]

WORKERS_ENV = "NLSBLOW_WORKERS"

RATE_QUANTITIES = ("eps_l2", "eps_h1_dot", "eps_h1", "eps_weighted")
_SERIES_ATTR = {
    "eps_l2": "l2",
    "eps_h1_dot": "h1_dot",
    "eps_h1": "h1",
    "eps_weighted": "weighted_l2",
}


@dataclass(frozen=True)
class StudyConfig:
    """One blow-up study: parameters, shared grid, window, and fit policy."""

    params: PhysParams
    grid: Grid
    n_list: tuple[int, ...]
    delta: float
    dt: float
    diag_every: int = 10
    fit_lo: float = 0.05
    fit_hi: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list or any(n <= 0 for n in self.n_list):
            raise ValueError("n_list must contain positive integers")
        if list(self.n_list) != sorted(self.n_list):
            raise ValueError("n_list must be increasing")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 <= self.fit_lo < self.fit_hi <= 1.0:
            raise ValueError("fit window fractions must satisfy 0 <= lo < hi <= 1")

    def start_time(self, n: int) -> float:
        return -1.0 / n


@dataclass
class EpsilonTrajectory:
    """Recorded difference-field norms (and snapshots) for one n."""

    n: int
    start_time: float
    delta: float
    times: np.ndarray             # decreasing, from T_n to T_n - delta
    offsets: np.ndarray           # tau = T_n - t, increasing from 0
    eps_norms: list[NormReport]
    eps_fields: list[Field]
    u_traj: TrajectoryRecord

    def eps_series(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.eps_norms])

    def eta_norms(self) -> list[NormReport]:
        """Norm reports of the time-reversed field eta_n(tau) = eps_n(T_n - tau).

        Pure bookkeeping: the reports are identical to the eps reports except
        that they are indexed by the offset tau instead of t.
        """
        return [
            NormReport(
                l2=r.l2,
                h1_dot=r.h1_dot,
                h1=r.h1,
                l_alpha_plus_2=r.l_alpha_plus_2,
                sigma=r.sigma,
                weighted_l2=r.weighted_l2,
                time_tag=self.start_time - r.time_tag,
            )
            for r in self.eps_norms
        ]


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponent of one eps norm against the window time."""

    quantity: str
    fitted_exponent: float
    predicted_exponent: float | None
    prefactor: float
    fit_residual: float

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "fitted_exponent": self.fitted_exponent,
            "predicted_exponent": self.predicted_exponent,
            "prefactor": self.prefactor,
            "fit_residual": self.fit_residual,
        }


@dataclass(frozen=True)
class CauchyDiagnostic:
    """Sup-in-time L2 gaps between consecutive reversed trajectories."""

    tau: float
    pairs: tuple[tuple[int, int], ...]
    pair_gaps: np.ndarray

    def monotone_decreasing(self, strict: bool = True) -> bool:
        d = np.diff(self.pair_gaps)
        return bool(np.all(d < 0) if strict else np.all(d <= 0))


def _check_resolution(cfg: StudyConfig, n: int):
    """Reject setups where the initial profile is under-resolved on the grid."""
    p, g = cfg.params, cfg.grid
    t0 = cfg.start_time(n)
    r = g.radii
    umax = float(np.abs(profile_value(p, t0, r)).max())
    gmax = float(np.abs(profile_radial_derivative(p, t0, r)).max())
    if gmax > 0 and umax / gmax < 4.0 * g.spacing:
        raise ValueError(
            f"grid too coarse for n={n}: profile gradient scale "
            f"{umax / gmax:.3g} < 4 spacings ({4 * g.spacing:.3g})"
        )
    if g.mode == CARTESIAN:
        t_low = t0 - cfg.delta
        edge = abs(profile_value(p, t_low, g.radius)) / abs(
            profile_value(p, t_low, 0.0)
        )
        if edge >= 1e-3:
            raise ValueError(
                f"cartesian domain too small: |U| at the boundary is "
                f"{edge:.2e} of the center value (needs < 1e-3); enlarge the "
                f"radius or increase k"
            )


def run_epsilon_trajectory(
    cfg: StudyConfig, n: int, dt: float | None = None, scheme: str = "strang"
) -> EpsilonTrajectory:
    """Evolve from U(T_n) over [T_n - delta, T_n] and record eps = u - U."""
    p = cfg.params
    validate_assumptions(p)
    p.require_blowup_mode()
    _check_resolution(cfg, n)
    t0 = cfg.start_time(n)
    solve_cfg = SolveConfig(
        dt=dt if dt is not None else cfg.dt,
        t_start=t0,
        t_end=t0 - cfg.delta,
        scheme=scheme,
        diag_every=cfg.diag_every,
        store_fields=True,
    )
    traj = evolve(profile_field(p, t0, cfg.grid), p, solve_cfg)
    eps_fields = []
    eps_norms = []
    for t, f in zip(traj.times, traj.fields):
        eps = f.with_values(f.values - profile_value(p, t, cfg.grid.radii))
        eps_fields.append(eps)
        eps_norms.append(norm_report(eps, p.alpha))
    return EpsilonTrajectory(
        n=n,
        start_time=t0,
        delta=cfg.delta,
        times=traj.times,
        offsets=t0 - traj.times,
        eps_norms=eps_norms,
        eps_fields=eps_fields,
        u_traj=traj,
    )


def _predicted_for(quantity: str, table: ExponentTable) -> float | None:
    if quantity == "eps_l2":
        return table.mu1
    if quantity == "eps_h1_dot":
        return table.h1_dot_rate
    if quantity == "eps_h1":
        return table.predicted_mu
    return None  # weighted rate is empirical only


def fit_rates(
    traj: EpsilonTrajectory,
    predicted: ExponentTable,
    window: tuple[float, float] = (0.05, 0.95),
) -> list[RateFit]:
    """Log-log slopes of the eps norms over the interior of the window.

    The window excludes the offsets nearest to T_n (eps is at roundoff there)
    and the far end, as fractions of delta.  Fails on fewer than 8 usable
    points.  Skips quantities that vanish identically (e.g. an ODE-only run).
    """
    lo, hi = window[0] * traj.delta, window[1] * traj.delta
    out = []
    for q in RATE_QUANTITIES:
        series = traj.eps_series(_SERIES_ATTR[q])
        mask = (traj.offsets >= lo) & (traj.offsets <= hi) & (series > 0)
        if np.all(series[traj.offsets > 0] == 0.0):
            continue
        if mask.sum() < 8:
            raise ValueError(
                f"only {int(mask.sum())} usable points for {q}; need >= 8"
            )
        logt = np.log(traj.offsets[mask])
        logn = np.log(series[mask])
        slope, intercept = np.polyfit(logt, logn, 1)
        out.append(
            RateFit(
                quantity=q,
                fitted_exponent=float(slope),
                predicted_exponent=_predicted_for(q, predicted),
                prefactor=float(np.exp(intercept)),
                fit_residual=float(np.max(np.abs(logn - (slope * logt + intercept)))),
            )
        )
    return out


def _check_aligned(trajectories: list[EpsilonTrajectory]):
    g0 = trajectories[0].eps_fields[0].grid
    off0 = trajectories[0].offsets
    for tr in trajectories[1:]:
        if tr.eps_fields[0].grid != g0:
            raise ValueError("trajectories were run on different grids")
        if len(tr.offsets) != len(off0) or not np.allclose(tr.offsets, off0):
            raise ValueError("trajectories have misaligned recording offsets")


def cauchy_diagnostic(
    cfg: StudyConfig, trajectories: list[EpsilonTrajectory], tau: float | None = None
) -> CauchyDiagnostic:
    """Pairwise sup-in-time L2 gaps of the reversed fields on [tau, delta].

    The gaps between consecutive members should shrink as n grows; that decay
    is the computable stand-in for convergence of the reversed sequence.
    """
    if len(trajectories) < 2:
        raise ValueError("need at least two trajectories to compare")
    _check_aligned(trajectories)
    tau = cfg.delta / 4.0 if tau is None else tau
    if not 0.0 < tau < cfg.delta:
        raise ValueError("tau must lie strictly inside (0, delta)")
    sel = np.flatnonzero(trajectories[0].offsets >= tau)
    pairs, gaps = [], []
    for a, b in zip(trajectories[:-1], trajectories[1:]):
        gap = max(
            lp_norm(
                a.eps_fields[j].with_values(
                    a.eps_fields[j].values - b.eps_fields[j].values
                ),
                2.0,
            )
            for j in sel
        )
        pairs.append((a.n, b.n))
        gaps.append(gap)
    return CauchyDiagnostic(tau=tau, pairs=tuple(pairs), pair_gaps=np.asarray(gaps))


def _sup_prefactor(traj: EpsilonTrajectory, mu: float, lo: float, hi: float) -> float:
    """Smallest C with ||eps(t)||_L2 <= C (T_n - t)^mu on the windowed offsets."""
    mask = (traj.offsets >= lo) & (traj.offsets <= hi)
    if not mask.any():
        return math.nan
    l2 = traj.eps_series("l2")[mask]
    return float(np.max(l2 / traj.offsets[mask] ** mu))


def uniform_delta_probe(
    cfg: StudyConfig,
    trajectories: list[EpsilonTrajectory],
    factor: float = 2.0,
    num_scan: int = 25,
) -> float:
    """Largest window length over which the L2 prefactors are n-uniform.

    Scans delta' <= delta and returns the largest value for which the sup
    prefactors C1(n) over [fit_lo*delta', fit_hi*delta'] stay within
    ``factor`` of each other across the n list; 0.0 if none does.
    """
    if len(trajectories) == 1:
        return cfg.delta
    mu = exponent_table(cfg.params).mu1
    for dp in np.linspace(cfg.delta, cfg.delta / 8.0, num_scan):
        cs = [
            _sup_prefactor(tr, mu, cfg.fit_lo * dp, cfg.fit_hi * dp)
            for tr in trajectories
        ]
        if any(map(math.isnan, cs)):
            continue
        if max(cs) / min(cs) < factor:
            return float(dp)
    return 0.0


def prefactor_spread(cfg: StudyConfig, trajectories: list[EpsilonTrajectory]) -> float:
    """max/min ratio of the sup prefactors C1(n) over the full fit window."""
    mu = exponent_table(cfg.params).mu1
    cs = [
        _sup_prefactor(tr, mu, cfg.fit_lo * cfg.delta, cfg.fit_hi * cfg.delta)
        for tr in trajectories
    ]
    return float(max(cs) / min(cs))


def strang_convergence_ratio(cfg: StudyConfig, n: int) -> float:
    """Self-convergence ratio ||u_dt - u_dt/2|| / ||u_dt/2 - u_dt/4|| (~4 at order 2)."""
    finals = []
    for div in (1, 2, 4):
        tr = run_epsilon_trajectory(cfg, n, dt=cfg.dt / div)
        finals.append(tr.u_traj.final_field)
    e_coarse = lp_norm(finals[0].with_values(finals[0].values - finals[1].values), 2.0)
    e_fine = lp_norm(finals[1].with_values(finals[1].values - finals[2].values), 2.0)
    return e_coarse / e_fine


@dataclass
class StudyReport:
    """Aggregate of every diagnostic for one study run, with pass/fail checks."""

    config_summary: dict
    exponents: dict
    admissibility: dict
    profile_scaling: list[dict]
    rate_fits: dict[int, list[RateFit]]
    cauchy: CauchyDiagnostic | None
    uniform_delta: float
    prefactor_ratio: float
    convergence_ratio: float
    critical_bound: CriticalBoundReport | None
    checks: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config_summary,
            "exponents": self.exponents,
            "admissibility": self.admissibility,
            "profile_scaling": self.profile_scaling,
            "rate_fits": {
                str(n): [f.to_dict() for f in fits] for n, fits in self.rate_fits.items()
            },
            "cauchy": None
            if self.cauchy is None
            else {
                "tau": self.cauchy.tau,
                "pairs": [list(p) for p in self.cauchy.pairs],
                "pair_gaps": list(map(float, self.cauchy.pair_gaps)),
            },
            "uniform_delta": self.uniform_delta,
            "prefactor_ratio": self.prefactor_ratio,
            "convergence_ratio": self.convergence_ratio,
            "critical_bound": None
            if self.critical_bound is None
            else {
                "spacetime_integral": self.critical_bound.spacetime_integral,
                "bound": self.critical_bound.bound,
                "lebesgue_exponent": self.critical_bound.lebesgue_exponent,
            },
            "checks": self.checks,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kw)

    @property
    def all_passed(self) -> bool:
        return all(self.checks.values())


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def _fit_lookup(fits: list[RateFit], quantity: str) -> RateFit | None:
    for f in fits:
        if f.quantity == quantity:
            return f
    return None


def run_all_trajectories(
    cfg: StudyConfig, workers: int | None = None
) -> list[EpsilonTrajectory]:
    """Run every n in the list; distinct n are independent parallel jobs.

    The worker count comes from the ``NLSBLOW_WORKERS`` environment variable
    unless given explicitly; results are ordered by n regardless.
    """
    with ThreadPoolExecutor(max_workers=_worker_count(workers)) as pool:
        return list(pool.map(lambda n: run_epsilon_trajectory(cfg, n), cfg.n_list))


def blowup_report(
    cfg: StudyConfig,
    workers: int | None = None,
    trajectories: list[EpsilonTrajectory] | None = None,
    rate_slack_l2: float = 0.05,
    rate_slack_h1: float = 0.10,
) -> StudyReport:
    """Run the whole study and aggregate every check into one report.

    Refuses non-blow-up parameters (real lam) with a pointer to validation
    mode.  Precomputed trajectories may be passed in; otherwise they are run
    here (see :func:`run_all_trajectories`).
    """
    p = cfg.params
    if not p.im_lam > 0:
        raise ValueError(
            "blow-up study needs Im(lam) > 0; for real lam run the solver in "
            "validation (conservation) mode instead"
        )
    report = validate_assumptions(p)
    if not report.theorem_applies:
        raise ValueError(
            "parameters fail the admissibility inequalities: "
            + "; ".join(report.failures())
        )
    table = exponent_table(p)

    if trajectories is None:
        trajectories = run_all_trajectories(cfg, workers)
    elif tuple(tr.n for tr in trajectories) != cfg.n_list:
        raise ValueError("supplied trajectories do not match cfg.n_list")
    fits = {
        tr.n: fit_rates(tr, table, window=(cfg.fit_lo, cfg.fit_hi))
        for tr in trajectories
    }

    t_hi = cfg.start_time(max(cfg.n_list))
    t_scaling = -np.geomspace(max(10.0 * -t_hi, 1.0), -t_hi, 13)
    scaling = [
        verify_scaling(p, "lp", t_scaling, lp=2.0),
        verify_scaling(p, "lp", t_scaling, lp=p.alpha + 2.0),
        verify_scaling(p, "grad_lp", t_scaling, lp=2.0),
        verify_scaling(p, "lap_l2", t_scaling),
    ]

    cauchy = (
        cauchy_diagnostic(cfg, trajectories) if len(trajectories) >= 2 else None
    )
    probe = uniform_delta_probe(cfg, trajectories)
    spread = prefactor_spread(cfg, trajectories)
    conv = strang_convergence_ratio(cfg, min(cfg.n_list))

    critical = None
    crit_power = math.inf if p.N <= 2 else 4.0 / (p.N - 2)
    if p.N >= 3 and math.isclose(p.alpha, crit_power, rel_tol=1e-9):
        critical = _critical_section(cfg)

    checks = {}
    for n, nf in fits.items():
        l2f = _fit_lookup(nf, "eps_l2")
        h1f = _fit_lookup(nf, "eps_h1")
        checks[f"eps_l2_rate_n{n}"] = l2f.fitted_exponent >= table.mu1 - rate_slack_l2
        checks[f"eps_h1_rate_n{n}"] = (
            h1f.fitted_exponent >= table.predicted_mu - rate_slack_h1
        )
    checks["prefactors_within_factor_2"] = spread < 2.0
    if cauchy is not None:
        checks["cauchy_gaps_decreasing"] = cauchy.monotone_decreasing(strict=True)
    checks["strang_second_order"] = conv >= 3.5
    for fit in scaling:
        checks[f"profile_{fit.quantity}_p{fit.p:g}"] = (
            abs(fit.fitted_slope - fit.predicted_slope) < 1e-2
        )
    if critical is not None:
        checks["critical_spacetime_bound"] = critical.holds(0.05)

    return StudyReport(
        config_summary={
            "N": p.N,
            "alpha": p.alpha,
            "lambda_re": p.re_lam,
            "lambda_im": p.im_lam,
            "k": p.k,
            "n_list": list(cfg.n_list),
            "delta": cfg.delta,
            "dt": cfg.dt,
            "diag_every": cfg.diag_every,
            "grid": cfg.grid.describe(),
        },
        exponents=table.to_dict(),
        admissibility=report.to_dict(),
        profile_scaling=[
            {
                "quantity": f.quantity,
                "p": f.p,
                "fitted_slope": f.fitted_slope,
                "predicted_slope": f.predicted_slope,
                "residual": f.residual,
            }
            for f in scaling
        ],
        rate_fits=fits,
        cauchy=cauchy,
        uniform_delta=probe,
        prefactor_ratio=spread,
        convergence_ratio=conv,
        critical_bound=critical,
        checks=checks,
    )


def _critical_section(cfg: StudyConfig) -> CriticalBoundReport:
    """Small-data backward run feeding the critical-power space-time check."""
    g = cfg.grid
    data = Field(g, np.exp(-g.radii**2).astype(np.complex128), time_tag=0.0)
    run = SolveConfig(
        dt=1e-3, t_start=0.0, t_end=-0.5, diag_every=25, store_fields=True
    )
    return critical_spacetime_bound(evolve(data, cfg.params, run))

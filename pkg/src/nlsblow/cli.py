"""Command-line entry points and artifact emission (the only side-effecting module).

Commands::

    nlsblow check-params  --config cfg.toml
    nlsblow profile-norms --config cfg.toml --out DIR
    nlsblow evolve        --config cfg.toml --out DIR [--dt-refine]
    nlsblow blowup-study  --config cfg.toml --out DIR [--dt-refine]
    nlsblow fit-rates     --config cfg.toml --out DIR

Outputs are deterministic for a fixed config (fixed iteration orders, no
untracked randomness; floats printed at 12 significant digits).  A manifest
is written before any other artifact; on failure a FAILED marker with the
error text is left in the output directory.  ``NLSBLOW_WORKERS`` controls how
many study trajectories run in parallel.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, ConfigError, RunConfig, load_config, serialize_config
from .field import Field, field_to_csv, lp_norm
from .params import exponent_table, validate_assumptions
from .profile import profile_field, verify_scaling
from .solver import evolve, trajectory_to_csv
from .study import (
    EpsilonTrajectory,
    blowup_report,
    fit_rates,
    run_all_trajectories,
    run_epsilon_trajectory,
)

SCHEMA = {
    "trajectory.csv": [
        "t",
        "l2",
        "h1_dot",
        "h1",
        "l_alpha_plus_2",
        "sigma",
        "weighted_l2",
        "charge_residual",
        "grad_monotone_ok",
    ],
    "final_field.csv": ["coordinate", "re", "im"],
    "scaling_<quantity>_p<p>.csv": ["t", "norm", "predicted", "fitted"],
    "eps_norms_n<n>.csv": [
        "tau",
        "t",
        "l2",
        "h1_dot",
        "h1",
        "l_alpha_plus_2",
        "sigma",
        "weighted_l2",
    ],
}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(outdir: Path, command: str, cfg: RunConfig, config_text: str):
    outdir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "normalized_config_sha256": hashlib.sha256(
            serialize_config(cfg).encode()
        ).hexdigest(),
        "grid": None if cfg.grid is None else cfg.grid.describe(),
        "dt": (cfg.solve or {}).get("dt", (cfg.study or {}).get("dt")),
        "seed": 0,
        "version": __version__,
        "float_format": "%.12g",
    }
    _write_json(outdir / "manifest.json", manifest)
    _write_json(outdir / "schema.json", SCHEMA)


def _initial_field(cfg: RunConfig) -> Field:
    solve = cfg.solve or {}
    kind = solve.get("initial", "gaussian")
    g = cfg.grid
    if g is None:
        raise ConfigError("missing [grid] section")
    if kind == "profile":
        t0 = solve.get("t_start")
        return profile_field(cfg.params, t0, g)
    if kind == "gaussian":
        amp = solve.get("amplitude", 1.0)
        width = solve.get("width", 1.0)
        vals = amp * np.exp(-(g.radii**2) / width**2)
        return Field(g, vals.astype(np.complex128), time_tag=solve.get("t_start", 0.0))
    raise ConfigError(f"unknown initial data kind {kind!r}")


def cmd_check_params(cfg: RunConfig) -> int:
    report = validate_assumptions(cfg.params)
    out = report.to_dict()
    out["exponents"] = exponent_table(cfg.params).to_dict()
    out["explanation"] = report.failures() or ["all admissibility inequalities hold"]
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if report.theorem_applies else 1


def cmd_profile_norms(cfg: RunConfig, outdir: Path) -> int:
    p = cfg.params
    sec = cfg.profile_norms or {}
    t_min = sec.get("t_min", -1.0)
    t_max = sec.get("t_max", -0.1)
    num = sec.get("num_times", 13)
    lps = sec.get("lp", [2.0, math.inf])
    t_list = -np.geomspace(-t_min, -t_max, num)
    summary = []
    for quantity, ps in (
        ("lp", lps),
        ("grad_lp", lps),
        ("lap_l2", [2.0]),
        ("gradlap_l2", [2.0]),
        ("weighted_lap_l2", [2.0]),
    ):
        for lp in ps:
            fit = verify_scaling(p, quantity, t_list, lp=lp)
            name = f"scaling_{quantity}_p{fit.p:g}.csv"
            fit.to_csv(outdir / name)
            summary.append(
                {
                    "quantity": quantity,
                    "p": fit.p,
                    "fitted_slope": fit.fitted_slope,
                    "predicted_slope": fit.predicted_slope,
                    "residual": fit.residual,
                    "csv": name,
                }
            )
    _write_json(outdir / "profile_norms.json", summary)
    for row in summary:
        print(
            f"{row['quantity']:>16s} p={row['p']:g}: fitted {_fmt(row['fitted_slope'])}"
            f" predicted {_fmt(row['predicted_slope'])}"
        )
    return 0


def cmd_evolve(cfg: RunConfig, outdir: Path, dt_refine: bool) -> int:
    p = cfg.params
    solve_cfg = cfg.solve_config()
    f0 = _initial_field(cfg)
    traj = evolve(f0, p, solve_cfg)
    trajectory_to_csv(traj, outdir / "trajectory.csv")
    field_to_csv(traj.final_field, outdir / "final_field.csv")
    summary = {
        "t_start": solve_cfg.t_start,
        "t_end": solve_cfg.t_end,
        "dt": solve_cfg.dt,
        "steps": int(round(abs(solve_cfg.t_end - solve_cfg.t_start) / solve_cfg.dt)),
        "final_l2": traj.norms[-1].l2,
        "final_h1": traj.norms[-1].h1,
        "max_charge_residual": float(np.nanmax(traj.charge_identity_residual)),
        "gradient_monotone_all": bool(traj.gradient_monotone_ok.all()),
    }
    if p.im_lam == 0.0:
        l2 = traj.norm_series("l2")
        lp = traj.norm_series("l_alpha_plus_2")
        energy = 0.5 * traj.norm_series("h1_dot") ** 2 + p.re_lam / (
            p.alpha + 2.0
        ) * lp ** (p.alpha + 2.0)
        summary["conservation"] = {
            "l2_relative_drift": float(np.max(np.abs(l2 - l2[0])) / l2[0]),
            "energy_relative_drift": float(
                np.max(np.abs(energy - energy[0])) / abs(energy[0])
            ),
        }
    if dt_refine:
        finals = [traj.final_field]
        for div in (2, 4):
            refined = evolve(
                f0,
                p,
                replace(
                    solve_cfg,
                    dt=solve_cfg.dt / div,
                    diag_every=solve_cfg.diag_every * div,
                ),
            )
            finals.append(refined.final_field)
        e01 = lp_norm(finals[0].with_values(finals[0].values - finals[1].values), 2.0)
        e12 = lp_norm(finals[1].with_values(finals[1].values - finals[2].values), 2.0)
        summary["convergence"] = {
            "error_dt_vs_dt2": e01,
            "error_dt2_vs_dt4": e12,
            "ratio": e01 / e12 if e12 > 0 else math.inf,
        }
    _write_json(outdir / "evolve_summary.json", summary)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _eps_norms_csv(tr: EpsilonTrajectory, path: Path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["tau", "t", "l2", "h1_dot", "h1", "l_alpha_plus_2", "sigma", "weighted_l2"]
        )
        for tau, t, rep in zip(tr.offsets, tr.times, tr.eps_norms):
            writer.writerow(
                [_fmt(tau), _fmt(t)]
                + [
                    _fmt(getattr(rep, a))
                    for a in (
                        "l2",
                        "h1_dot",
                        "h1",
                        "l_alpha_plus_2",
                        "sigma",
                        "weighted_l2",
                    )
                ]
            )


def cmd_blowup_study(cfg: RunConfig, outdir: Path, dt_refine: bool) -> int:
    study_cfg = cfg.study_config()
    trajectories = run_all_trajectories(study_cfg)
    report = blowup_report(study_cfg, trajectories=trajectories)
    for tr in trajectories:
        _eps_norms_csv(tr, outdir / f"eps_norms_n{tr.n}.csv")
    doc = report.to_dict()
    if dt_refine:
        table = exponent_table(cfg.params)
        stability = {}
        for n in study_cfg.n_list:
            fine = fit_rates(
                run_epsilon_trajectory(study_cfg, n, dt=study_cfg.dt / 2.0),
                table,
                window=(study_cfg.fit_lo, study_cfg.fit_hi),
            )
            coarse = {f.quantity: f for f in report.rate_fits[n]}
            stability[str(n)] = {
                f.quantity: abs(f.fitted_exponent - coarse[f.quantity].fitted_exponent)
                for f in fine
                if f.quantity in coarse
            }
        doc["rate_stability_dt_halving"] = stability
    (outdir / "study_report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    for name, ok in sorted(report.checks.items()):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if report.all_passed else 1


def cmd_fit_rates(cfg: RunConfig, outdir: Path) -> int:
    study_cfg = cfg.study_config()
    table = exponent_table(cfg.params)
    results = {}
    for n in study_cfg.n_list:
        path = outdir / f"eps_norms_n{n}.csv"
        if not path.exists():
            raise FileNotFoundError(
                f"{path} not found; run blowup-study into this directory first"
            )
        rows = list(csv.DictReader(open(path, newline="")))
        offsets = np.array([float(r["tau"]) for r in rows])
        fits = {}
        for quantity, col in (
            ("eps_l2", "l2"),
            ("eps_h1_dot", "h1_dot"),
            ("eps_h1", "h1"),
            ("eps_weighted", "weighted_l2"),
        ):
            series = np.array([float(r[col]) for r in rows])
            lo = study_cfg.fit_lo * study_cfg.delta
            hi = study_cfg.fit_hi * study_cfg.delta
            mask = (offsets >= lo) & (offsets <= hi) & (series > 0)
            if mask.sum() < 8:
                raise ValueError(f"fewer than 8 usable points for {quantity}, n={n}")
            slope, intercept = np.polyfit(np.log(offsets[mask]), np.log(series[mask]), 1)
            fits[quantity] = {
                "fitted_exponent": float(slope),
                "prefactor": float(np.exp(intercept)),
            }
        fits["eps_l2"]["predicted_exponent"] = table.mu1
        fits["eps_h1_dot"]["predicted_exponent"] = table.h1_dot_rate
        fits["eps_h1"]["predicted_exponent"] = table.predicted_mu
        results[str(n)] = fits
    _write_json(outdir / "rate_fits.json", results)
    print(json.dumps(results, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlsblow",
        description="Blow-up laboratory for the complex-coefficient NLS",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML config file")
        if name != "check-params":
            sp.add_argument("--out", required=True, help="output directory")
        if name in ("evolve", "blowup-study"):
            sp.add_argument(
                "--dt-refine",
                action="store_true",
                help="also run at halved dt for a convergence certificate",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config_text = Path(args.config).read_text(encoding="utf-8")
        cfg = load_config(args.config)
    except (OSError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    if args.command == "check-params":
        return cmd_check_params(cfg)

    outdir = Path(args.out)
    try:
        _write_manifest(outdir, args.command, cfg, config_text)
        if args.command == "profile-norms":
            return cmd_profile_norms(cfg, outdir)
        if args.command == "evolve":
            return cmd_evolve(cfg, outdir, args.dt_refine)
        if args.command == "blowup-study":
            return cmd_blowup_study(cfg, outdir, args.dt_refine)
        if args.command == "fit-rates":
            return cmd_fit_rates(cfg, outdir)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as e:
        (outdir / "FAILED").write_text(str(e) + "\n", encoding="utf-8")
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        (outdir / "FAILED").write_text(f"{type(e).__name__}: {e}\n", encoding="utf-8")
        print(f"run failed: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

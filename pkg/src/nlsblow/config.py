"""Run configuration: flat key/value sections, parsed from TOML text.

The complex coefficient is stored as two reals (``lambda_re``, ``lambda_im``).
``serialize_config`` emits a canonical form (fixed section and key order,
shortest round-trip float formatting), so parse/serialize round-trips exactly
and normalization is idempotent.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field as dc_field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .field import Grid
from .params import PhysParams
from .solver import SolveConfig
from .study import StudyConfig

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "serialize_config",
    "normalize_config",
    "load_config",
]

COMMANDS = ("check-params", "profile-norms", "evolve", "blowup-study", "fit-rates")


class ConfigError(ValueError):
    """Malformed or incomplete configuration text."""


@dataclass
class RunConfig:
    """Everything one CLI invocation needs, minus the command and output dir."""

    params: PhysParams
    grid: Grid | None = None
    solve: dict | None = None
    study: dict | None = None
    profile_norms: dict | None = None
    extras: dict = dc_field(default_factory=dict)

    def solve_config(self) -> SolveConfig:
        if self.solve is None:
            raise ConfigError("missing [solve] section")
        keys = ("dt", "t_start", "t_end", "scheme", "viscosity_eps", "diag_every")
        return SolveConfig(**{k: self.solve[k] for k in keys if k in self.solve})

    def study_config(self) -> StudyConfig:
        if self.study is None:
            raise ConfigError("missing [study] section")
        if self.grid is None:
            raise ConfigError("missing [grid] section")
        s = self.study
        try:
            return StudyConfig(
                params=self.params,
                grid=self.grid,
                n_list=tuple(s["n_list"]),
                delta=s["delta"],
                dt=s["dt"],
                diag_every=s.get("diag_every", 10),
                fit_lo=s.get("fit_lo", 0.05),
                fit_hi=s.get("fit_hi", 0.95),
            )
        except KeyError as e:
            raise ConfigError(f"missing [study] key {e.args[0]!r}") from None


_FLOAT_KEYS = {
    "alpha",
    "lambda_re",
    "lambda_im",
    "k",
    "radius",
    "dt",
    "t_start",
    "t_end",
    "viscosity_eps",
    "delta",
    "fit_lo",
    "fit_hi",
    "t_min",
    "t_max",
    "amplitude",
    "width",
}
_INT_KEYS = {"N", "num_points", "diag_every", "num_times"}


def _coerce(section: str, key: str, value):
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"[{section}] {key} must be an integer")
        return value
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"[{section}] {key} must be a number")
        return float(value)
    return value


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises ConfigError on anything malformed."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"config does not parse: {e}") from None
    if "params" not in raw:
        raise ConfigError("missing [params] section")
    sections = {
        name: {k: _coerce(name, k, v) for k, v in sec.items()}
        for name, sec in raw.items()
        if isinstance(sec, dict)
    }
    par = sections.pop("params")
    try:
        params = PhysParams(
            N=par["N"],
            alpha=par["alpha"],
            lam=complex(par.get("lambda_re", 0.0), par["lambda_im"]),
            k=par.get("k", 2.0),
        )
    except KeyError as e:
        raise ConfigError(f"missing [params] key {e.args[0]!r}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None

    grid = None
    if "grid" in sections:
        g = sections.pop("grid")
        try:
            grid = Grid(
                mode=g.get("mode", "cartesian" if params.N == 1 else "radial"),
                N=params.N,
                num_points=g["num_points"],
                radius=g["radius"],
            )
        except KeyError as e:
            raise ConfigError(f"missing [grid] key {e.args[0]!r}") from None
        except ValueError as e:
            raise ConfigError(str(e)) from None

    return RunConfig(
        params=params,
        grid=grid,
        solve=sections.pop("solve", None),
        study=sections.pop("study", None),
        profile_norms=sections.pop("profile_norms", None),
        extras=sections,
    )


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form: fixed section order, keys sorted inside sections."""
    p = cfg.params
    sections: list[tuple[str, dict]] = [
        (
            "params",
            {
                "N": p.N,
                "alpha": p.alpha,
                "lambda_re": p.re_lam,
                "lambda_im": p.im_lam,
                "k": p.k,
            },
        )
    ]
    if cfg.grid is not None:
        g = cfg.grid
        sections.append(
            ("grid", {"mode": g.mode, "num_points": g.num_points, "radius": g.radius})
        )
    for name, sec in (
        ("solve", cfg.solve),
        ("study", cfg.study),
        ("profile_norms", cfg.profile_norms),
    ):
        if sec is not None:
            sections.append((name, sec))
    for name in sorted(cfg.extras):
        sections.append((name, cfg.extras[name]))

    lines = []
    for name, sec in sections:
        lines.append(f"[{name}]")
        for key in sorted(sec):
            lines.append(f"{key} = {_toml_value(sec[key])}")
        lines.append("")
    return "\n".join(lines)


def normalize_config(text: str) -> str:
    return serialize_config(parse_config(text))


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

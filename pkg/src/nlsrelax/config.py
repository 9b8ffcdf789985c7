"""Declarative run configurations.

A configuration is a flat YAML mapping; every key is validated against
the schema below and unknown keys are hard errors so that a typo cannot
silently change an experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .problems import available_problems
from .relaxation import RelaxationConfig
from .tableaux import available_tableaux

EQUATIONS = ("nls", "nls_hyperbolic")
OPERATOR_KINDS = ("fourier", "central", "bounded", "upwind")
RELAXATION_MODES = ("off", "energy", "mass_energy")
SWEEP_AXES = ("time", "space")


class ConfigError(ValueError):
    """Configuration file error, reported with field context."""


@dataclass
class RunConfig:
    problem: str
    equation: str
    operator_kind: str
    operator_n: int
    tableau: str
    dt: float
    t_end: float
    operator_order: int = 0
    relaxation: str = "off"
    gamma_tol: float = RelaxationConfig.gamma_tol
    bracket_width: float = RelaxationConfig.bracket_width
    max_expansions: int = RelaxationConfig.max_expansions
    tau: Optional[float] = None
    beta_override: Optional[float] = None
    output: Optional[str] = None
    snapshot_times: list[float] = field(default_factory=list)
    # Sweep settings, used by the convergence command only.
    sweep_axis: Optional[str] = None
    sweep_values: list[float] = field(default_factory=list)
    reference_dt: Optional[float] = None
    # Sample times, used by the error-growth command only.
    sample_times: list[float] = field(default_factory=list)

    def relaxation_config(self) -> RelaxationConfig:
        return RelaxationConfig(
            gamma_tol=self.gamma_tol,
            bracket_width=self.bracket_width,
            max_expansions=self.max_expansions,
        )


_SCALAR_FIELDS = {
    "problem": str,
    "equation": str,
    "operator_kind": str,
    "operator_order": int,
    "operator_n": int,
    "tableau": str,
    "dt": float,
    "t_end": float,
    "relaxation": str,
    "gamma_tol": float,
    "bracket_width": float,
    "max_expansions": int,
    "tau": float,
    "beta_override": float,
    "output": str,
    "sweep_axis": str,
    "reference_dt": float,
}
_LIST_FIELDS = {"snapshot_times", "sweep_values", "sample_times"}
_REQUIRED = ("problem", "equation", "operator_kind", "operator_n", "tableau", "dt", "t_end")


def _coerce(name: str, value, target):
    if target is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field {name!r}: expected an integer, got {value!r}")
        return value
    if target is str:
        if not isinstance(value, str):
            raise ConfigError(f"field {name!r}: expected a string, got {value!r}")
        return value
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"field {name!r}: expected a number, got {value!r}")
    return float(value)


def config_from_mapping(mapping: dict) -> RunConfig:
    if not isinstance(mapping, dict):
        raise ConfigError("configuration must be a flat key/value mapping")
    unknown = set(mapping) - set(_SCALAR_FIELDS) - _LIST_FIELDS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
    missing = [key for key in _REQUIRED if key not in mapping]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    kwargs = {}
    for name, value in mapping.items():
        if name in _LIST_FIELDS:
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"field {name!r}: expected a list of numbers")
            kwargs[name] = [_coerce(f"{name}[{i}]", v, float) for i, v in enumerate(value)]
        else:
            kwargs[name] = _coerce(name, value, _SCALAR_FIELDS[name])
    config = RunConfig(**kwargs)
    validate_config(config)
    return config


def validate_config(config: RunConfig):
    def check(ok: bool, message: str):
        if not ok:
            raise ConfigError(message)

    check(config.problem in available_problems(),
          f"field 'problem': unknown problem {config.problem!r}")
    check(config.equation in EQUATIONS,
          f"field 'equation': must be one of {', '.join(EQUATIONS)}")
    check(config.operator_kind in OPERATOR_KINDS,
          f"field 'operator_kind': must be one of {', '.join(OPERATOR_KINDS)}")
    check(config.tableau in available_tableaux(),
          f"field 'tableau': unknown tableau {config.tableau!r}")
    check(config.dt > 0, "field 'dt': must be positive")
    check(config.t_end > 0, "field 't_end': must be positive")
    check(config.operator_n >= 2, "field 'operator_n': must be at least 2")
    check(config.relaxation in RELAXATION_MODES,
          f"field 'relaxation': must be one of {', '.join(RELAXATION_MODES)}")
    if config.equation == "nls_hyperbolic":
        check(config.tau is not None,
              "field 'tau': required for the hyperbolic equation")
        check(config.tau > 0, "field 'tau': must be positive")
        check(config.operator_kind == "upwind",
              "field 'operator_kind': the hyperbolic equation requires upwind operators")
    else:
        check(config.tau is None,
              "field 'tau': only meaningful for equation = nls_hyperbolic")
    if config.operator_kind != "fourier":
        check(config.operator_order > 0,
              "field 'operator_order': required for finite-difference operators")
    if config.sweep_axis is not None:
        check(config.sweep_axis in SWEEP_AXES,
              f"field 'sweep_axis': must be one of {', '.join(SWEEP_AXES)}")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        mapping = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    try:
        return config_from_mapping(mapping or {})
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

"""Line-oriented run configuration: `key = value` entries under [section] headers.

The parameter space is flat, so the grammar is deliberately simple (see the
README for the EBNF).  Unknown keys are rejected by name; parse errors carry
the line number; admissibility of the problem parameters is re-validated on
load.  All defaults are applied here and echoed into the run manifest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import ProblemParams
from .geometry import DEFAULT_GRADING_EXPONENT, DEFAULT_GRID_FLOOR_REL


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "problem": {
        "s": float,
        "m": float,
        "lambda": float,
        "C1": float,
        "N": int,
        "allow_subcritical_s": bool,
    },
    "source": {
        "kind": str,  # profile | constant
        "constant": float,
    },
    "grid": {
        "left": float,
        "right": float,
        "interior_count": int,
        "grading_exponent": float,
        "grid_floor": float,
    },
    "solver": {
        "solver_tolerance": float,
        "interior_tolerance": float,
        "max_iterations": int,
        "r_schedule": "float_list",
    },
    "ergodic": {
        "lambda_seq": "float_list",
        "x0": float,
        "ergodic_tolerance": float,
    },
    "barriers": {
        "mu": float,
        "beta_fraction": float,
        "eps": float,
        "cstar": float,
    },
    "output": {
        "directory": str,
    },
    "run": {
        "seed": int,
    },
}

_DEFAULTS = {
    "problem": {"lambda": 1.0, "C1": 1.0, "N": 1, "allow_subcritical_s": False},
    "source": {"kind": "profile", "constant": 0.0},
    "grid": {
        "left": 0.0,
        "right": 1.0,
        "interior_count": 512,
        "grading_exponent": DEFAULT_GRADING_EXPONENT,
        "grid_floor": None,  # resolved to 1e-4 * L
    },
    "solver": {
        "solver_tolerance": 1e-8,
        "interior_tolerance": 1e-6,
        "max_iterations": 200,
        "r_schedule": None,  # resolved against the source
    },
    "ergodic": {
        "lambda_seq": tuple(0.2 * 2.0**-k for k in range(7)),
        "x0": None,  # midpoint
        "ergodic_tolerance": 1e-4,
    },
    "barriers": {"mu": 0.02, "beta_fraction": 0.5, "eps": 0.25, "cstar": 25.0},
    "output": {"directory": "out"},
    "run": {"seed": 0},
}


def _convert(section, key, raw, lineno):
    typ = _SCHEMA[section][key]
    try:
        if typ is float:
            return float(raw)
        if typ is int:
            return int(raw)
        if typ is bool:
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if typ == "float_list":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"line {lineno}: cannot parse value {raw!r} for {section}.{key}"
        ) from exc


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, dotted: str):
        section, key = dotted.split(".")
        return self.values[section][key]

    def get(self, dotted: str, default=None):
        try:
            return self[dotted]
        except KeyError:
            return default

    def problem_params(self) -> ProblemParams:
        p = self.values["problem"]
        return ProblemParams(
            s=p["s"], m=p["m"], lam=p["lambda"], N=p["N"], C1=p["C1"],
            solver_regime=not p["allow_subcritical_s"],
        )

    def echo(self) -> str:
        lines = []
        for section in sorted(self.values):
            lines.append(f"[{section}]")
            for key in sorted(self.values[section]):
                val = self.values[section][key]
                if isinstance(val, tuple):
                    val = ",".join(format(v, ".17g") for v in val)
                elif isinstance(val, float):
                    val = format(val, ".17g")
                lines.append(f"{key} = {val}")
            lines.append("")
        return "\n".join(lines)


def parse_config_text(text: str, overrides=()) -> RunConfig:
    values = {sec: dict(defaults) for sec, defaults in _DEFAULTS.items()}
    section = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {rawline!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in section [{section}]")
        values[section][key] = _convert(section, key, raw, lineno)

    for dotted, raw in overrides:
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must be section.key")
        sec, key = dotted.split(".", 1)
        if sec not in _SCHEMA or key not in _SCHEMA[sec]:
            raise ConfigError(f"unknown override key {dotted!r}")
        values[sec][key] = _convert(sec, key, str(raw), 0)

    cfg = RunConfig(values)
    _validate(cfg)
    return cfg


def load_config(path, overrides=()) -> RunConfig:
    with open(path, "r") as fh:
        return parse_config_text(fh.read(), overrides)


def _validate(cfg: RunConfig):
    p = cfg.values["problem"]
    if "s" not in p or "m" not in p:
        raise ConfigError("problem.s and problem.m are required")
    s, m = p["s"], p["m"]
    if not p["allow_subcritical_s"]:
        if not (0.5 < s < 1.0):
            raise ConfigError(
                f"problem.s = {s}: s must exceed 1/2 for the solver pipeline "
                "(set problem.allow_subcritical_s = true for barrier-only runs)"
            )
        if not (s + 0.5 < m <= 2.0 * s):
            raise ConfigError(
                f"problem.m = {m}: m must lie in (s + 1/2, 2s] = ({s+0.5}, {2*s}]"
            )
    g = cfg.values["grid"]
    if not g["left"] < g["right"]:
        raise ConfigError("grid.left must be below grid.right")
    if g["grid_floor"] is None:
        g["grid_floor"] = DEFAULT_GRID_FLOOR_REL * (g["right"] - g["left"])
    if g["interior_count"] < 8:
        raise ConfigError("grid.interior_count must be at least 8")
    sv = cfg.values["solver"]
    for key in ("solver_tolerance", "interior_tolerance"):
        if sv[key] <= 0:
            raise ConfigError(f"solver.{key} must be positive")
    er = cfg.values["ergodic"]
    if er["ergodic_tolerance"] <= 0:
        raise ConfigError("ergodic.ergodic_tolerance must be positive")
    lam_seq = er["lambda_seq"]
    if any(b >= a for a, b in zip(lam_seq, lam_seq[1:])) or min(lam_seq) <= 0:
        raise ConfigError("ergodic.lambda_seq must be strictly decreasing and positive")
    cfg.values["problem"].setdefault("lambda", 1.0)
    # construct params once to surface admissibility errors with field names
    cfg.problem_params()

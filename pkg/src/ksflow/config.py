"""Flat key = value run configuration with section headers.

No nesting: every line is `key = value` under a `[section]` header, blank
lines and #-comments allowed.  Unknown sections or keys are errors, so a
config file can never silently misspell a knob.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .solver import SolverConfig

DEFAULT_MONITORS = (
    "mass",
    "fisher",
    "entropy",
    "energy",
    "ellipticity",
    "hbound",
    "maxpoint",
    "moments",
    "l3bound",
    "envelope",
)

_SCHEMA = {
    "run": {"scenario": str, "seed": int, "out": str},
    "solver": {
        "gamma": float,
        "n_cells": int,
        "r_max": float,
        "dt": float,
        "t_end": float,
        "scheme": str,
        "output_stride": int,
        "positivity": str,
    },
    "initial": {"kind": str, "sigma": float, "mass": float, "amplitude": float},
    "monitors": {"enabled": str},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "run"
    seed: int = 0
    out: str = "out"
    solver: SolverConfig = field(default_factory=SolverConfig)
    initial_kind: str = "gaussian"
    sigma: float = 1.0
    mass: float | None = 1.0
    amplitude: float | None = None
    monitors: tuple = DEFAULT_MONITORS

    def echo_lines(self) -> list:
        """The config as it will be reproduced verbatim in the run report."""
        lines = [
            "[run]",
            f"scenario = {self.scenario}",
            f"seed = {self.seed}",
            f"out = {self.out}",
            "",
            "[solver]",
            f"gamma = {self.solver.gamma!r}",
            f"n_cells = {self.solver.n_cells}",
            f"r_max = {self.solver.r_max!r}",
            f"dt = {self.solver.dt!r}",
            f"t_end = {self.solver.t_end!r}",
            f"scheme = {self.solver.scheme}",
            f"output_stride = {self.solver.output_stride}",
            f"positivity = {self.solver.positivity}",
            "",
            "[initial]",
            f"kind = {self.initial_kind}",
            f"sigma = {self.sigma!r}",
        ]
        if self.amplitude is not None:
            lines.append(f"amplitude = {self.amplitude!r}")
        else:
            lines.append(f"mass = {self.mass!r}")
        lines += ["", "[monitors]", "enabled = " + ", ".join(self.monitors)]
        return lines


def parse_config_text(text: str) -> RunConfig:
    section = None
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside of any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        caster = _SCHEMA[section][key]
        try:
            values[(section, key)] = caster(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc

    solver_kwargs = {k: v for (s, k), v in values.items() if s == "solver"}
    cfg = RunConfig(
        scenario=values.get(("run", "scenario"), "run"),
        seed=values.get(("run", "seed"), 0),
        out=values.get(("run", "out"), "out"),
        solver=SolverConfig(**solver_kwargs),
        initial_kind=values.get(("initial", "kind"), "gaussian"),
        sigma=values.get(("initial", "sigma"), 1.0),
    )
    if ("initial", "amplitude") in values and ("initial", "mass") in values:
        raise ConfigError("give either mass or amplitude for the initial data, not both")
    if ("initial", "amplitude") in values:
        cfg.amplitude = values[("initial", "amplitude")]
        cfg.mass = None
    elif ("initial", "mass") in values:
        cfg.mass = values[("initial", "mass")]
    if cfg.initial_kind not in ("gaussian", "zero"):
        raise ConfigError(f"unknown initial kind {cfg.initial_kind!r}")
    if ("monitors", "enabled") in values:
        requested = tuple(
            name.strip() for name in values[("monitors", "enabled")].split(",")
            if name.strip()
        )
        unknown = set(requested) - set(DEFAULT_MONITORS)
        if unknown:
            raise ConfigError(f"unknown monitors: {sorted(unknown)}")
        cfg.monitors = requested
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="ascii") as fh:
        return parse_config_text(fh.read())

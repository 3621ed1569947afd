"""Run configuration: JSON document in, validated dataclasses out.

Every field is optional. Validation happens before any computation and each
failure names the offending field.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

from .command import CommanderParams
from .dynamics import DEFAULT_GRID, TWO_POINT_GRID, TWO_POINT_PEAK, StrategyGrid
from .errors import InvalidInputError
from .game import PayoffMatrix

SWEEP_PARAMETERS = ("e", "alpha", "beta", "c", "R", "V", "p0")
SWEEP_SUMMARIES = ("final_pbar", "attractor", "regime", "stackelberg_regime", "case", "e_star")
DENSITY_KINDS = ("gaussian", "two_point")
MODES = ("aggregate", "density")
FORMATS = ("csv", "json")


class ConfigError(InvalidInputError):
    """A configuration field failed validation."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass
class InitialDensity:
    kind: str = "gaussian"
    mean: float = 0.0
    sigma: float = 1.0


@dataclass
class GridSpec:
    theta_min: float
    theta_max: float
    n: int


@dataclass
class Dynamics:
    mode: str = "aggregate"
    p0: float = 0.9
    initial_density: InitialDensity = field(default_factory=InitialDensity)
    grid: Optional[GridSpec] = None

    def resolved_grid(self) -> StrategyGrid:
        if self.grid is not None:
            return StrategyGrid(self.grid.theta_min, self.grid.theta_max, self.grid.n)
        return TWO_POINT_GRID if self.initial_density.kind == "two_point" else DEFAULT_GRID


@dataclass
class Integration:
    dt: float = 0.01
    t_end: float = 200.0
    sample_interval: Optional[float] = None


@dataclass
class Sweep:
    parameter: str = "e"
    start: float = 0.0
    stop: float = 3.0
    steps: int = 301
    summary: List[str] = field(default_factory=lambda: list(SWEEP_SUMMARIES))

    def values(self) -> List[float]:
        if self.steps == 1:
            return [self.start]
        span = self.stop - self.start
        vals = [self.start + span * i / (self.steps - 1) for i in range(self.steps)]
        vals[-1] = self.stop
        return vals


@dataclass
class Output:
    path: Optional[str] = None
    format: Optional[str] = None


@dataclass
class RunConfig:
    payoffs: PayoffMatrix = field(default_factory=PayoffMatrix)
    e: float = 0.0
    commander: CommanderParams = field(default_factory=CommanderParams)
    dynamics: Dynamics = field(default_factory=Dynamics)
    integration: Integration = field(default_factory=Integration)
    sweep: Sweep = field(default_factory=Sweep)
    output: Output = field(default_factory=Output)
    seed: Optional[int] = None


_SCHEMA = {
    "payoffs": {"R", "V", "S", "P"},
    "e": None,
    "commander": {"alpha", "beta", "c", "allow_negative_alpha"},
    "dynamics": {"mode", "p0", "initial_density", "grid"},
    "integration": {"dt", "t_end", "sample_interval"},
    "sweep": {"parameter", "start", "stop", "steps", "summary"},
    "output": {"path", "format"},
    "seed": None,
}


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a JSON object")
    unknown = set(value) - _SCHEMA[name]
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown field")
    return value


def _real(section: dict, key: str, default, where: str) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(where, f"must be finite, got {value!r}")
    return value


def _integer(section: dict, key: str, default, where: str) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(where, f"must be an integer, got {value!r}")
    return value


def _choice(section: dict, key: str, default, choices, where: str):
    value = section.get(key, default)
    if value is not None and value not in choices:
        raise ConfigError(where, f"must be one of {', '.join(choices)}, got {value!r}")
    return value


def validate_payoffs(R: float, V: float, S: float, P: float, where: str = "payoffs") -> PayoffMatrix:
    if not R > V:
        raise ConfigError(f"{where}.R", f"coordination ordering R > V violated (R={R!r}, V={V!r})")
    if not P > S:
        raise ConfigError(f"{where}.P", f"coordination ordering P > S violated (P={P!r}, S={S!r})")
    return PayoffMatrix(R, V, S, P)


def validate_commander(alpha: float, beta: float, c: float, allow_negative: bool,
                       where: str = "commander") -> CommanderParams:
    if not c > 0.0:
        raise ConfigError(f"{where}.c", f"enforcement cost c must be > 0, got {c!r}")
    if beta < 0.0:
        raise ConfigError(f"{where}.beta", f"enforcement benefit beta must be >= 0, got {beta!r}")
    if alpha < 0.0 and not allow_negative:
        raise ConfigError(f"{where}.alpha",
                          f"conflict value alpha must be >= 0 unless "
                          f"allow_negative_alpha is set, got {alpha!r}")
    return CommanderParams(alpha, beta, c, allow_negative)


def validate_enforcement(e: float, where: str = "e") -> float:
    if e < 0.0:
        raise ConfigError(where, f"enforcement e must be >= 0, got {e!r}")
    return e


def validate_p0(p0: float, where: str = "dynamics.p0") -> float:
    if not 0.0 <= p0 <= 1.0:
        raise ConfigError(where, f"initial cooperation p0 must lie in [0, 1], got {p0!r}")
    return p0


def parse_config(doc: Optional[dict] = None) -> RunConfig:
    """Validate a configuration document and fill in defaults."""
    doc = {} if doc is None else doc
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = set(doc) - set(_SCHEMA)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")

    pay = _section(doc, "payoffs")
    payoffs = validate_payoffs(*(_real(pay, k, d, f"payoffs.{k}")
                                 for k, d in (("R", 3.0), ("V", 1.0), ("S", 0.0), ("P", 1.0))))

    e = validate_enforcement(_real(doc, "e", 0.0, "e"))

    com = _section(doc, "commander")
    allow_neg = com.get("allow_negative_alpha", False)
    if not isinstance(allow_neg, bool):
        raise ConfigError("commander.allow_negative_alpha", "must be true or false")
    commander = validate_commander(_real(com, "alpha", 1.0, "commander.alpha"),
                                   _real(com, "beta", 1.0, "commander.beta"),
                                   _real(com, "c", 1.0, "commander.c"), allow_neg)

    dyn = _section(doc, "dynamics")
    mode = _choice(dyn, "mode", "aggregate", MODES, "dynamics.mode")
    p0 = validate_p0(_real(dyn, "p0", 0.9, "dynamics.p0"))
    init_doc = dyn.get("initial_density") or {}
    if not isinstance(init_doc, dict):
        raise ConfigError("dynamics.initial_density", "must be a JSON object")
    unknown = set(init_doc) - {"kind", "mean", "sigma"}
    if unknown:
        raise ConfigError(f"dynamics.initial_density.{sorted(unknown)[0]}", "unknown field")
    kind = _choice(init_doc, "kind", "gaussian", DENSITY_KINDS, "dynamics.initial_density.kind")
    mean = _real(init_doc, "mean", 0.0, "dynamics.initial_density.mean")
    sigma = _real(init_doc, "sigma", 1.0, "dynamics.initial_density.sigma")
    if not sigma > 0.0:
        raise ConfigError("dynamics.initial_density.sigma", f"must be > 0, got {sigma!r}")
    grid = None
    grid_doc = dyn.get("grid")
    if grid_doc is not None:
        if not isinstance(grid_doc, dict):
            raise ConfigError("dynamics.grid", "must be a JSON object")
        unknown = set(grid_doc) - {"theta_min", "theta_max", "n"}
        if unknown:
            raise ConfigError(f"dynamics.grid.{sorted(unknown)[0]}", "unknown field")
        lo = _real(grid_doc, "theta_min", DEFAULT_GRID.theta_min, "dynamics.grid.theta_min")
        hi = _real(grid_doc, "theta_max", DEFAULT_GRID.theta_max, "dynamics.grid.theta_max")
        n = _integer(grid_doc, "n", DEFAULT_GRID.n, "dynamics.grid.n")
        if not lo < hi:
            raise ConfigError("dynamics.grid.theta_max",
                              f"grid requires theta_min < theta_max, got {lo!r} >= {hi!r}")
        if n < 3:
            raise ConfigError("dynamics.grid.n", f"grid requires n >= 3, got {n!r}")
        if kind == "two_point" and not (lo <= -TWO_POINT_PEAK and TWO_POINT_PEAK <= hi):
            raise ConfigError("dynamics.grid",
                              f"two_point preset needs the grid to cover +/-{TWO_POINT_PEAK}")
        grid = GridSpec(lo, hi, n)
    dynamics = Dynamics(mode, p0, InitialDensity(kind, mean, sigma), grid)

    integ = _section(doc, "integration")
    dt = _real(integ, "dt", 0.01, "integration.dt")
    if not dt > 0.0:
        raise ConfigError("integration.dt", f"time step dt must be > 0, got {dt!r}")
    t_end = _real(integ, "t_end", 200.0, "integration.t_end")
    if not t_end > 0.0:
        raise ConfigError("integration.t_end", f"t_end must be > 0, got {t_end!r}")
    sample_interval = integ.get("sample_interval")
    if sample_interval is not None:
        sample_interval = _real(integ, "sample_interval", None, "integration.sample_interval")
        if not sample_interval > 0.0:
            raise ConfigError("integration.sample_interval",
                              f"must be > 0, got {sample_interval!r}")
    integration = Integration(dt, t_end, sample_interval)

    sw = _section(doc, "sweep")
    parameter = _choice(sw, "parameter", "e", SWEEP_PARAMETERS, "sweep.parameter")
    start = _real(sw, "start", 0.0, "sweep.start")
    stop = _real(sw, "stop", 3.0, "sweep.stop")
    steps = _integer(sw, "steps", 301, "sweep.steps")
    if steps < 1:
        raise ConfigError("sweep.steps", f"must be >= 1, got {steps!r}")
    if stop < start:
        raise ConfigError("sweep.stop", f"must be >= sweep.start, got {stop!r} < {start!r}")
    summary = sw.get("summary", list(SWEEP_SUMMARIES))
    if not isinstance(summary, list) or not summary:
        raise ConfigError("sweep.summary", "must be a non-empty list")
    for item in summary:
        if item not in SWEEP_SUMMARIES:
            raise ConfigError("sweep.summary",
                              f"unknown summary {item!r}; choose from {', '.join(SWEEP_SUMMARIES)}")
    sweep = Sweep(parameter, start, stop, steps, list(summary))

    out = _section(doc, "output")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "must be a string")
    fmt = _choice(out, "format", None, FORMATS, "output.format")

    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError("seed", f"must be an integer, got {seed!r}")

    return RunConfig(payoffs, e, commander, dynamics, integration, sweep, Output(path, fmt), seed)


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read a JSON config file (or start from defaults) and apply dotted-key overrides."""
    doc = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON in {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "configuration must be a JSON object")
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        target = doc
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = target.get(key)
            if not isinstance(node, dict):
                node = {}
                target[key] = node
            target = node
        target[leaf] = value
    return parse_config(doc)

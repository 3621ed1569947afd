"""Command-line front end.

Verbs: ``simulate``, ``bifurcate``, ``stackelberg``, ``policy``, ``sweep``.
Exit status is 0 on success, 2 on validation errors and 3 on numerical
failures.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional, Tuple

from . import serialize
from .command import optimal_enforcement
from .config import (
    ConfigError,
    RunConfig,
    load_config,
    validate_commander,
    validate_enforcement,
    validate_p0,
    validate_payoffs,
)
from .dynamics import (
    attractor_label,
    endpoint_batch,
    gaussian_density,
    simulate_aggregate,
    simulate_density,
    two_point_density,
    two_point_weight_for,
)
from .equilibria import analyze, bifurcation_sweep
from .errors import (
    DegenerateStateError,
    InvalidInputError,
    InvalidStateError,
    NumericError,
    StepSizeError,
)
from .policy import lever_report


EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def run_simulation(cfg: RunConfig):
    dyn, integ = cfg.dynamics, cfg.integration
    if dyn.mode == "aggregate":
        return simulate_aggregate(dyn.p0, cfg.e, cfg.payoffs, integ.t_end, integ.dt,
                                  integ.sample_interval)
    grid = dyn.resolved_grid()
    init = dyn.initial_density
    if init.kind == "two_point":
        d0 = two_point_density(two_point_weight_for(dyn.p0), grid)
    else:
        d0 = gaussian_density(grid, init.mean, init.sigma)
    return simulate_density(d0, cfg.e, cfg.payoffs, integ.t_end, integ.dt, integ.sample_interval)


def _sweep_point(cfg: RunConfig, value: float):
    """Apply one sweep value; returns ``(payoffs, e, commander, p0)``."""
    name = cfg.sweep.parameter
    where = f"sweep.{name}={value!r}"
    pay = dict(R=cfg.payoffs.R, V=cfg.payoffs.V, S=cfg.payoffs.S, P=cfg.payoffs.P)
    com = cfg.commander
    e, p0 = cfg.e, cfg.dynamics.p0
    alpha, beta, c = com.alpha, com.beta, com.c
    if name in pay:
        pay[name] = value
    elif name == "e":
        e = validate_enforcement(value, where)
    elif name == "p0":
        p0 = validate_p0(value, where)
    elif name == "alpha":
        alpha = value
    elif name == "beta":
        beta = value
    elif name == "c":
        c = value
    payoffs = validate_payoffs(pay["R"], pay["V"], pay["S"], pay["P"], where)
    commander = validate_commander(alpha, beta, c, com.allow_negative_alpha, where)
    return payoffs, e, commander, p0


def sweep_table(cfg: RunConfig) -> Tuple[List[str], List[list]]:
    """Rows of the sweep: the swept value followed by the requested summaries."""
    values = cfg.sweep.values()
    points = [_sweep_point(cfg, v) for v in values]
    summary = cfg.sweep.summary
    finals = None
    if "final_pbar" in summary or "attractor" in summary:
        finals = endpoint_batch(
            [p0 for _, _, _, p0 in points],
            [e for _, e, _, _ in points],
            [pay.delta for pay, _, _, _ in points],
            [pay.S - pay.P for pay, _, _, _ in points],
            cfg.integration.t_end, cfg.integration.dt,
        )
    rows = []
    for i, (value, (payoffs, e, commander, _)) in enumerate(zip(values, points)):
        row = [value]
        sol = None
        for item in summary:
            if item == "final_pbar":
                row.append(float(finals[i]))
            elif item == "attractor":
                row.append(attractor_label(float(finals[i])))
            elif item == "regime":
                row.append(analyze(e, payoffs).regime.value)
            else:
                sol = sol or optimal_enforcement(commander, payoffs)
                if item == "stackelberg_regime":
                    row.append(sol.regime.value)
                elif item == "case":
                    row.append(sol.outcome_case.value)
                else:
                    row.append(sol.e_star)
        rows.append(row)
    return [cfg.sweep.parameter] + list(summary), rows


def _bifurcation_values(cfg: RunConfig):
    if cfg.sweep.parameter != "e":
        raise ConfigError("sweep.parameter", "bifurcate sweeps enforcement; parameter must be 'e'")
    if cfg.sweep.start < 0.0:
        raise ConfigError("sweep.start", f"enforcement e must be >= 0, got {cfg.sweep.start!r}")
    return cfg.sweep.values()


def render(verb: str, cfg: RunConfig, fmt: str) -> Tuple[str, Optional[str]]:
    """Produce the output document for ``verb`` and an optional status line."""
    if verb == "simulate":
        traj = run_simulation(cfg)
        text = (serialize.trajectory_to_csv(traj) if fmt == "csv"
                else serialize.trajectory_to_json(traj))
        status = (f"final pbar = {serialize.fmt(traj.final_pbar)}; "
                  f"attractor: {attractor_label(traj.final_pbar)}")
        return text, status
    if verb == "bifurcate":
        rows = bifurcation_sweep(_bifurcation_values(cfg), cfg.payoffs)
        return (serialize.bifurcation_to_csv(rows) if fmt == "csv"
                else serialize.bifurcation_to_json(rows)), None
    if verb == "stackelberg":
        sol = optimal_enforcement(cfg.commander, cfg.payoffs)
        if fmt == "json":
            return serialize.stackelberg_to_json(sol), None
        doc = serialize.stackelberg_to_dict(sol)
        return serialize.table_to_csv(list(doc), [list(doc.values())]), None
    if verb == "policy":
        results = lever_report(cfg.commander, cfg.payoffs)
        return (serialize.levers_to_csv(results) if fmt == "csv"
                else serialize.levers_to_json(results)), None
    if verb == "sweep":
        header, rows = sweep_table(cfg)
        return (serialize.table_to_csv(header, rows) if fmt == "csv"
                else serialize.table_to_json(header, rows)), None
    raise ValueError(f"unknown verb {verb!r}")


DEFAULT_FORMAT = {"stackelberg": "json"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wartruce",
        description="Replicator dynamics of frontline truces under command enforcement.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    helps = {
        "simulate": "integrate the aggregate ODE or the density replicator equation",
        "bifurcate": "equilibria and stability over a range of enforcement levels",
        "stackelberg": "commander's optimal enforcement and outcome case",
        "policy": "critical values of the alpha, beta, c and R-V levers",
        "sweep": "scan one scalar parameter and summarise each point",
    }
    for verb, text in helps.items():
        p = sub.add_parser(verb, help=text, description=text)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--e", type=float, help="enforcement level")
        p.add_argument("--alpha", type=float, help="commander's value of conflict")
        p.add_argument("--beta", type=float, help="commander's benefit of enforcement")
        p.add_argument("--c", type=float, help="enforcement cost coefficient")
        p.add_argument("--p0", type=float, help="initial mean cooperation")
        if verb == "simulate":
            p.add_argument("--mode", choices=("aggregate", "density"))
        if verb in ("sweep", "bifurcate"):
            p.add_argument("--param", help="parameter to sweep")
            p.add_argument("--from", dest="start", type=float)
            p.add_argument("--to", dest="stop", type=float)
            p.add_argument("--steps", type=int)
    return parser


def _overrides(args) -> dict:
    return {
        "e": args.e,
        "commander.alpha": args.alpha,
        "commander.beta": args.beta,
        "commander.c": args.c,
        "dynamics.p0": args.p0,
        "dynamics.mode": getattr(args, "mode", None),
        "sweep.parameter": getattr(args, "param", None),
        "sweep.start": getattr(args, "start", None),
        "sweep.stop": getattr(args, "stop", None),
        "sweep.steps": getattr(args, "steps", None),
        "output.path": args.out,
        "output.format": args.format,
    }


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        fmt = cfg.output.format or DEFAULT_FORMAT.get(args.verb, "csv")
        text, status = render(args.verb, cfg, fmt)
    except (StepSizeError, DegenerateStateError, InvalidStateError, NumericError) as exc:
        print(f"wartruce: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"wartruce: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if status:
            print(status)
    else:
        sys.stdout.write(text)
        if status:
            print(status, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

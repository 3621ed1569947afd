"""CSV/JSON writers and matching readers for every emitted artifact.

Floats in CSV use 17 significant digits, so every value parses back to the
identical double. JSON relies on ``repr`` round-tripping, which is exact too.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, List

import numpy as np

from .command import OutcomeCase, StackelbergRegime, StackelbergSolution
from .dynamics import Trajectory
from .equilibria import BifurcationRow, Kind, Stability
from .policy import Direction, Lever, LeverResult

TRAJECTORY_DENSITY_HEADER = ["t", "pbar", "var_p", "mean_payoff"]
TRAJECTORY_AGGREGATE_HEADER = ["t", "pbar"]
BIFURCATION_HEADER = ["e", "branch", "pstar", "stability"]
LEVER_HEADER = ["lever", "current", "critical", "direction", "feasible"]


def fmt(x: float) -> str:
    return "%.17g" % x


def _render(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _records(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return header, list(reader)


def trajectory_to_csv(traj: Trajectory) -> str:
    if traj.is_density:
        cols = (traj.t, traj.pbar, traj.var_p, traj.mean_payoff)
        header = TRAJECTORY_DENSITY_HEADER
    else:
        cols = (traj.t, traj.pbar)
        header = TRAJECTORY_AGGREGATE_HEADER
    return _render(header, ([fmt(v) for v in row] for row in zip(*cols)))


def trajectory_from_csv(text: str) -> Trajectory:
    header, rows = _records(text)
    if header not in (TRAJECTORY_DENSITY_HEADER, TRAJECTORY_AGGREGATE_HEADER):
        raise ValueError(f"unrecognised trajectory header {header}")
    data = np.array([[float(v) for v in row] for row in rows]).reshape(len(rows), len(header))
    return Trajectory(*(data[:, j] for j in range(len(header))))


def trajectory_to_json(traj: Trajectory) -> str:
    doc = {"t": traj.t.tolist(), "pbar": traj.pbar.tolist()}
    if traj.is_density:
        doc["var_p"] = traj.var_p.tolist()
        doc["mean_payoff"] = traj.mean_payoff.tolist()
    return json.dumps(doc, indent=2) + "\n"


def trajectory_from_json(text: str) -> Trajectory:
    doc = json.loads(text)
    return Trajectory(doc["t"], doc["pbar"], doc.get("var_p"), doc.get("mean_payoff"))


def bifurcation_to_csv(rows: Iterable[BifurcationRow]) -> str:
    lines = []
    for row in rows:
        for kind, pstar, stability in row.branches:
            lines.append([fmt(row.e), kind.value, fmt(pstar), stability.value])
    return _render(BIFURCATION_HEADER, lines)


def bifurcation_from_csv(text: str) -> List[BifurcationRow]:
    header, records = _records(text)
    if header != BIFURCATION_HEADER:
        raise ValueError(f"unrecognised bifurcation header {header}")
    grouped = {}
    for e, branch, pstar, stability in records:
        grouped.setdefault(float(e), []).append((Kind(branch), float(pstar), Stability(stability)))
    out = []
    for e, branches in grouped.items():
        split = {s: sorted(p for _, p, st in branches if st is s) for s in Stability}
        out.append(BifurcationRow(e, split[Stability.STABLE], split[Stability.UNSTABLE],
                                  split[Stability.MARGINAL], tuple(branches)))
    return out


def bifurcation_to_json(rows: Iterable[BifurcationRow]) -> str:
    doc = [
        {"e": r.e, "branches": [{"branch": k.value, "pstar": p, "stability": s.value}
                                for k, p, s in r.branches]}
        for r in rows
    ]
    return json.dumps(doc, indent=2) + "\n"


def bifurcation_from_json(text: str) -> List[BifurcationRow]:
    out = []
    for item in json.loads(text):
        branches = tuple((Kind(b["branch"]), b["pstar"], Stability(b["stability"]))
                         for b in item["branches"])
        split = {s: sorted(p for _, p, st in branches if st is s) for s in Stability}
        out.append(BifurcationRow(item["e"], split[Stability.STABLE], split[Stability.UNSTABLE],
                                  split[Stability.MARGINAL], branches))
    return out


def stackelberg_to_dict(sol: StackelbergSolution) -> dict:
    return {
        "e_star": sol.e_star,
        "regime": sol.regime.value,
        "utility": sol.utility,
        "case": sol.outcome_case.value,
        "e_p": sol.peace_candidate[0],
        "U_p": sol.peace_candidate[1],
        "e_c": sol.conflict_candidate[0],
        "U_c": sol.conflict_candidate[1],
        "peace_bound": sol.peace_bound,
    }


def stackelberg_to_json(sol: StackelbergSolution) -> str:
    return json.dumps(stackelberg_to_dict(sol), indent=2) + "\n"


def stackelberg_from_dict(doc: dict) -> StackelbergSolution:
    case = OutcomeCase(doc["case"])
    # the threshold is e_c when beta/c <= tau (cases 1, 3) and e_p otherwise
    threshold = doc["e_c"] if case in (OutcomeCase.CASE1, OutcomeCase.CASE3) else doc["e_p"]
    return StackelbergSolution(
        e_star=doc["e_star"],
        regime=StackelbergRegime(doc["regime"]),
        utility=doc["utility"],
        peace_candidate=(doc["e_p"], doc["U_p"]),
        conflict_candidate=(doc["e_c"], doc["U_c"]),
        outcome_case=case,
        peace_bound=doc["peace_bound"],
        threshold=threshold,
    )


def stackelberg_from_json(text: str) -> StackelbergSolution:
    return stackelberg_from_dict(json.loads(text))


def levers_to_csv(results: Iterable[LeverResult]) -> str:
    rows = [[r.lever.value, fmt(r.current), "" if r.critical is None else fmt(r.critical),
             r.direction.value, "true" if r.feasible else "false"] for r in results]
    return _render(LEVER_HEADER, rows)


def levers_from_csv(text: str) -> List[LeverResult]:
    header, records = _records(text)
    if header != LEVER_HEADER:
        raise ValueError(f"unrecognised lever header {header}")
    return [LeverResult(Lever(lever), float(current), float(critical) if critical else None,
                        feasible == "true", Direction(direction))
            for lever, current, critical, direction, feasible in records]


def levers_to_json(results: Iterable[LeverResult]) -> str:
    doc = [{"lever": r.lever.value, "current": r.current, "critical": r.critical,
            "direction": r.direction.value, "feasible": r.feasible} for r in results]
    return json.dumps(doc, indent=2) + "\n"


def levers_from_json(text: str) -> List[LeverResult]:
    return [LeverResult(Lever(d["lever"]), d["current"], d["critical"], d["feasible"],
                        Direction(d["direction"])) for d in json.loads(text)]


def table_to_csv(header: List[str], rows: Iterable[list]) -> str:
    """Generic table writer; floats get 17 significant digits."""
    return _render(header, ([fmt(v) if isinstance(v, float) else v for v in row] for row in rows))


def table_to_json(header: List[str], rows: Iterable[list]) -> str:
    return json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n"

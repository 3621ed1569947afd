"""Fixed points, linear stability and bifurcation structure of the aggregate ODE.

Everything here is closed form. Root finding only appears in the tests and in
the optional dynamic check of :func:`basin_threshold`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from .dynamics import aggregate_endpoint
from .errors import InvalidInputError, NumericError
from .game import PayoffMatrix, check_enforcement, check_pbar

MARGINAL_TOL = 1e-12


class Kind(str, Enum):
    CONFLICT = "conflict"
    PEACE = "peace"
    INTERIOR = "interior"


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class Regime(str, Enum):
    BISTABLE = "Bistable"
    MONOSTABLE_CONFLICT = "MonostableConflict"
    THRESHOLD = "Threshold"


def classify(eigenvalue: float, tol: float = MARGINAL_TOL) -> Stability:
    if eigenvalue < -tol:
        return Stability.STABLE
    if eigenvalue > tol:
        return Stability.UNSTABLE
    return Stability.MARGINAL


@dataclass(frozen=True)
class Equilibrium:
    pstar: float
    kind: Kind
    eigenvalue: float

    @property
    def stability(self) -> Stability:
        return classify(self.eigenvalue)


@dataclass(frozen=True)
class EquilibriumReport:
    e: float
    equilibria: tuple
    regime: Regime
    basin_boundary: Optional[float] = None

    def by_kind(self, kind: Kind) -> Optional[Equilibrium]:
        for eq in self.equilibria:
            if eq.kind == kind:
                return eq
        return None


@dataclass(frozen=True)
class BifurcationRow:
    """Equilibria at one enforcement level, split by stability.

    ``branches`` keeps the ``(kind, pstar, stability)`` triples in the order
    they are written to CSV.
    """

    e: float
    stable_branches: List[float] = field(default_factory=list)
    unstable_branches: List[float] = field(default_factory=list)
    marginal_branches: List[float] = field(default_factory=list)
    branches: tuple = ()


def _margin(e: float, payoffs: PayoffMatrix) -> float:
    # equals -g'(1)
    return payoffs.threshold - e


def interior_equilibrium(e: float, payoffs: PayoffMatrix) -> Optional[float]:
    """The unstable interior rest point ``(e + P - S) / delta``, or ``None`` when ``e >= R - V``."""
    e = check_enforcement(e)
    if _margin(e, payoffs) <= MARGINAL_TOL:
        return None
    return (e + payoffs.P - payoffs.S) / payoffs.delta


def stability_derivative(pbar: float, e: float, payoffs: PayoffMatrix) -> float:
    """Derivative of the aggregate velocity with respect to ``pbar``."""
    pbar = check_pbar(pbar)
    e = check_enforcement(e)
    # convex-combination form keeps g'(0) = S-P-e and g'(1) = e-tau exact
    bracket = pbar * payoffs.threshold + (1.0 - pbar) * (payoffs.S - payoffs.P) - e
    return (1.0 - 2.0 * pbar) * bracket + pbar * (1.0 - pbar) * payoffs.delta


def analyze(e: float, payoffs: PayoffMatrix) -> EquilibriumReport:
    """Rest points of the aggregate dynamics with stability and regime.

    Examples
    --------
    >>> r = analyze(0.5, PayoffMatrix(3, 1, 0, 1))
    >>> [(q.pstar, q.stability.value) for q in r.equilibria]
    [(0.0, 'stable'), (0.5, 'unstable'), (1.0, 'stable')]
    >>> r.regime.value, r.basin_boundary
    ('Bistable', 0.5)
    """
    e = check_enforcement(e)
    found = [Equilibrium(0.0, Kind.CONFLICT, stability_derivative(0.0, e, payoffs))]
    interior = interior_equilibrium(e, payoffs)
    if interior is not None:
        found.append(Equilibrium(interior, Kind.INTERIOR,
                                 stability_derivative(interior, e, payoffs)))
    found.append(Equilibrium(1.0, Kind.PEACE, stability_derivative(1.0, e, payoffs)))

    peace = classify(found[-1].eigenvalue)
    if peace is Stability.STABLE:
        regime = Regime.BISTABLE
    elif peace is Stability.UNSTABLE:
        regime = Regime.MONOSTABLE_CONFLICT
    else:
        regime = Regime.THRESHOLD
    return EquilibriumReport(e, tuple(found), regime,
                             interior if regime is Regime.BISTABLE else None)


def bifurcation_sweep(e_values: Sequence[float], payoffs: PayoffMatrix) -> List[BifurcationRow]:
    """One :class:`BifurcationRow` per enforcement level (conflict, peace, interior order)."""
    e_values = [float(e) for e in e_values]
    if not e_values:
        raise InvalidInputError("e_values must be non-empty")
    if any(b < a for a, b in zip(e_values, e_values[1:])):
        raise InvalidInputError("e_values must be sorted in increasing order")
    order = (Kind.CONFLICT, Kind.PEACE, Kind.INTERIOR)
    rows = []
    for e in e_values:
        report = analyze(e, payoffs)
        split = {s: [] for s in Stability}
        branches = []
        for kind in order:
            eq = report.by_kind(kind)
            if eq is None:
                continue
            split[eq.stability].append(eq.pstar)
            branches.append((kind, eq.pstar, eq.stability))
        rows.append(BifurcationRow(e, sorted(split[Stability.STABLE]),
                                   sorted(split[Stability.UNSTABLE]),
                                   sorted(split[Stability.MARGINAL]), tuple(branches)))
    return rows


def basin_threshold(e: float, payoffs: PayoffMatrix, verify: bool = False,
                    delta_p: float = 1e-2, t_end: float = 500.0, dt: float = 0.01,
                    tol: float = 1e-3) -> Optional[float]:
    """Initial cooperation above which the population converges to full peace.

    Same value as :func:`interior_equilibrium`. With ``verify=True`` the
    aggregate ODE is run from ``threshold +/- delta_p`` and a
    :class:`NumericError` is raised unless the two runs end within ``tol`` of
    1 and 0 respectively.
    """
    threshold = interior_equilibrium(e, payoffs)
    if threshold is None or not verify:
        return threshold
    starts = np.array([min(1.0, threshold + delta_p), max(0.0, threshold - delta_p)])
    up, down = aggregate_endpoint(starts, e, payoffs, t_end, dt)
    if abs(up - 1.0) > tol or abs(down) > tol:
        raise NumericError(
            f"dynamic check failed at e={e!r}: runs from threshold +/- {delta_p} "
            f"ended at {up!r} and {down!r}"
        )
    return threshold


def dynamic_basin_boundary(e: float, payoffs: PayoffMatrix, t_end: float = 500.0,
                           dt: float = 0.01, xtol: float = 1e-6,
                           probes_per_pass: int = 1025) -> Optional[float]:
    """Locate the basin boundary by bisection on simulated endpoints.

    Independent of the closed form: classifies each initial condition by
    whether the aggregate run ends nearer to 1 or to 0. Returns ``None`` when
    no boundary separates the endpoints of ``[0, 1]`` (monostable regimes).
    """
    e = check_enforcement(e)
    lo, hi = 0.0, 1.0
    # the boundary points themselves are rest points; probe just inside
    ends = aggregate_endpoint(np.array([1e-9, 1.0 - 1e-9]), e, payoffs, t_end, dt)
    if not (ends[0] < 0.5 < ends[1]):
        return None
    while hi - lo > xtol:
        # many probes per pass: the cost of a pass is dominated by the step loop
        probes = np.linspace(lo, hi, probes_per_pass + 2)[1:-1]
        up = aggregate_endpoint(probes, e, payoffs, t_end, dt) > 0.5
        idx = int(np.argmax(up)) if up.any() else len(probes)
        lo = probes[idx - 1] if idx > 0 else lo
        hi = probes[idx] if idx < len(probes) else hi
    return 0.5 * (lo + hi)


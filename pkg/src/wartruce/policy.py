"""Single-parameter interventions that make peace the commander's optimum.

Each lever is moved on its own, all other parameters held fixed. A lever whose
baseline already yields peace reports ``critical == current``. Closed-form
critical values are nudged by a few ulps where needed so that applying the
reported value reproduces peace exactly under the optimiser's tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

from .command import CommanderParams, peace_condition
from .errors import NumericError
from .game import PayoffMatrix


class Lever(str, Enum):
    ALPHA = "Alpha"
    BETA = "Beta"
    C = "C"
    THRESHOLD_RV = "ThresholdRV"


class Direction(str, Enum):
    DECREASE = "Decrease"
    INCREASE = "Increase"


@dataclass(frozen=True)
class LeverResult:
    lever: Lever
    current: float
    critical: Optional[float]
    feasible: bool
    direction: Direction

    def __post_init__(self):
        if self.feasible != (self.critical is not None):
            raise ValueError("critical must be given exactly when the lever is feasible")


_MAX_NUDGES = 64


def _prefers_peace(params: CommanderParams, payoffs: PayoffMatrix) -> bool:
    return peace_condition(params, payoffs)[0]


def _nudge(value: float, toward: float, is_peace) -> float:
    for _ in range(_MAX_NUDGES):
        if is_peace(value):
            return value
        value = math.nextafter(value, toward)
    raise NumericError(f"could not reach the peace side near {value!r}")


def _signed_root(alpha: float, c: float) -> float:
    # sqrt(2*alpha/c), carrying the sign of alpha when negative alpha is enabled
    return math.copysign(math.sqrt(2.0 * abs(alpha) / c), alpha)


def critical_alpha(params: CommanderParams, payoffs: PayoffMatrix) -> LeverResult:
    """Largest conflict value at which the commander still weakly prefers peace."""
    prefers_peace, rhs = peace_condition(params, payoffs)
    if prefers_peace:
        return LeverResult(Lever.ALPHA, params.alpha, params.alpha, True, Direction.DECREASE)
    if rhs < 0.0:
        return LeverResult(Lever.ALPHA, params.alpha, None, False, Direction.DECREASE)
    return LeverResult(Lever.ALPHA, params.alpha, max(0.0, rhs), True, Direction.DECREASE)


def critical_beta(params: CommanderParams, payoffs: PayoffMatrix) -> LeverResult:
    """Enforcement benefit to which ``beta`` must fall for peace.

    ``beta_crit = c * (tau - sqrt(2*alpha/c))``; infeasible when that is
    negative, i.e. when ``alpha > c/2 * tau**2``.
    """
    current = params.beta
    if _prefers_peace(params, payoffs):
        return LeverResult(Lever.BETA, current, current, True, Direction.DECREASE)
    beta = params.c * (payoffs.threshold - _signed_root(params.alpha, params.c))
    if beta < 0.0:
        return LeverResult(Lever.BETA, current, None, False, Direction.DECREASE)
    beta = _nudge(beta, -math.inf,
                  lambda b: b >= 0.0 and _prefers_peace(params.replace(beta=b), payoffs))
    return LeverResult(Lever.BETA, current, beta, True, Direction.DECREASE)


def critical_cost(params: CommanderParams, payoffs: PayoffMatrix, rtol: float = 1e-15,
                  max_doublings: int = 200) -> LeverResult:
    """Smallest enforcement cost ``c' >= c`` that makes peace weakly preferred.

    Found by bisection on the peace indicator, which is monotone in ``c'``;
    the bracket's upper end is doubled until it reaches peace.

    Raises
    ------
    NumericError
        If no peaceful upper bracket is found.
    """
    current = params.c

    def is_peace(c):
        return _prefers_peace(params.replace(c=c), payoffs)

    if is_peace(current):
        return LeverResult(Lever.C, current, current, True, Direction.INCREASE)
    lo, hi = current, 2.0 * current
    for _ in range(max_doublings):
        if is_peace(hi):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericError("bracket expansion for the cost lever failed")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if is_peace(mid):
            hi = mid
        else:
            lo = mid
    return LeverResult(Lever.C, current, hi, True, Direction.INCREASE)


def critical_threshold(params: CommanderParams, payoffs: PayoffMatrix) -> LeverResult:
    """Peace threshold ``tau' = R - V`` needed for peace: ``beta/c + sqrt(2*alpha/c)``.

    The value is realised by raising ``R`` with ``V`` fixed; the reported
    critical value is the threshold of the payoff matrix
    ``payoffs.with_threshold(critical)``.
    """
    current = payoffs.threshold
    if _prefers_peace(params, payoffs):
        return LeverResult(Lever.THRESHOLD_RV, current, current, True, Direction.INCREASE)
    tau = params.unconstrained_optimum + _signed_root(params.alpha, params.c)
    tau = max(tau, current)
    tau = _nudge(tau, math.inf,
                 lambda t: _prefers_peace(params, payoffs.with_threshold(t)))
    return LeverResult(Lever.THRESHOLD_RV, current, tau, True, Direction.INCREASE)


def lever_report(params: CommanderParams, payoffs: PayoffMatrix) -> List[LeverResult]:
    return [
        critical_alpha(params, payoffs),
        critical_beta(params, payoffs),
        critical_cost(params, payoffs),
        critical_threshold(params, payoffs),
    ]


def apply_lever(result: LeverResult, value: float, params: CommanderParams,
                payoffs: PayoffMatrix):
    """Return ``(params, payoffs)`` with the lever in ``result`` set to ``value``."""
    if result.lever is Lever.ALPHA:
        return params.replace(alpha=value), payoffs
    if result.lever is Lever.BETA:
        return params.replace(beta=value), payoffs
    if result.lever is Lever.C:
        return params.replace(c=value), payoffs
    return params, payoffs.with_threshold(value)

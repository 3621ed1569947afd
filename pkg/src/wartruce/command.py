"""Command authority as a Stackelberg leader choosing enforcement.

The population starts at full peace. Enforcement ``e <= R - V`` keeps it
there; ``e > R - V`` destabilises peace and the population slides to full
conflict. The commander's utility is therefore piecewise::

    U(e) = beta*e - c/2*e**2              for e <= R - V   (peace branch)
    U(e) = alpha + beta*e - c/2*e**2      for e >  R - V   (conflict branch)

The conflict branch is maximised over the closed set ``[R - V, inf)``; an
optimum exactly at ``R - V`` is a supremum that any real commander realises by
enforcing marginally above the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from .errors import InvalidInputError
from .game import PayoffMatrix, check_enforcement


class StackelbergRegime(str, Enum):
    PEACE = "Peace"
    CONFLICT = "Conflict"


class OutcomeCase(str, Enum):
    CASE1 = "Case1_StablePeaceLowEnforcement"
    CASE2 = "Case2_PeaceAtThreshold"
    CASE3 = "Case3_TransitionToConflict"
    CASE4 = "Case4_FullConflictHighEnforcement"


@dataclass(frozen=True)
class CommanderParams:
    """Preferences of the command authority.

    Attributes
    ----------
    alpha : float
        Value the commander places on conflict (weight on ``1 - pbar*``).
    beta : float
        Direct benefit per unit of enforcement.
    c : float
        Quadratic enforcement cost coefficient, strictly positive.
    allow_negative_alpha : bool
        Admit ``alpha < 0`` (a commander who dislikes conflict). Off by default.
    """

    alpha: float = 1.0
    beta: float = 1.0
    c: float = 1.0
    allow_negative_alpha: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "c"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"commander {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.c > 0.0:
            raise InvalidInputError(f"commander c must be > 0, got {self.c!r}")
        if self.beta < 0.0:
            raise InvalidInputError(f"commander beta must be >= 0, got {self.beta!r}")
        if self.alpha < 0.0 and not self.allow_negative_alpha:
            raise InvalidInputError(
                f"commander alpha must be >= 0, got {self.alpha!r} "
                "(set allow_negative_alpha to admit it)"
            )

    @property
    def unconstrained_optimum(self) -> float:
        """``beta / c``, the peak of both concave branches."""
        return self.beta / self.c

    def replace(self, **changes) -> "CommanderParams":
        fields = dict(alpha=self.alpha, beta=self.beta, c=self.c,
                      allow_negative_alpha=self.allow_negative_alpha)
        fields.update(changes)
        return CommanderParams(**fields)


@dataclass(frozen=True)
class StackelbergSolution:
    e_star: float
    regime: StackelbergRegime
    utility: float
    peace_candidate: Tuple[float, float]
    conflict_candidate: Tuple[float, float]
    outcome_case: OutcomeCase
    peace_bound: float
    threshold: float

    @property
    def at_threshold_supremum(self) -> bool:
        """Conflict chosen with ``e_star == R - V``: realised by enforcing slightly above it."""
        return self.regime is StackelbergRegime.CONFLICT and self.e_star == self.threshold


def _enforcement_cost_utility(e: float, params: CommanderParams) -> float:
    return params.beta * e - 0.5 * params.c * e * e


def peace_branch_utility(e: float, params: CommanderParams) -> float:
    return _enforcement_cost_utility(e, params)


def conflict_branch_utility(e: float, params: CommanderParams) -> float:
    return params.alpha + _enforcement_cost_utility(e, params)


def commander_utility(e: float, params: CommanderParams, payoffs: PayoffMatrix) -> float:
    """Commander's utility at enforcement ``e``; ``e == R - V`` counts as peace."""
    e = check_enforcement(e)
    if e <= payoffs.threshold:
        return peace_branch_utility(e, params)
    return conflict_branch_utility(e, params)


def branch_optima(params: CommanderParams, payoffs: PayoffMatrix):
    """Best enforcement on each branch: ``(e_p, U_p), (e_c, U_c)``."""
    tau, ratio = payoffs.threshold, params.unconstrained_optimum
    e_p, e_c = min(ratio, tau), max(ratio, tau)
    return ((e_p, peace_branch_utility(e_p, params)),
            (e_c, conflict_branch_utility(e_c, params)))


def peace_condition(params: CommanderParams, payoffs: PayoffMatrix) -> Tuple[bool, float]:
    """Whether the commander weakly prefers peace, and the bound on ``alpha``.

    Peace holds iff ``alpha <= c/2*(e_c**2 - e_p**2) - beta*(e_c - e_p)``. The
    bound equals ``+c/2*(tau - beta/c)**2`` when ``beta/c <= tau`` and
    ``-c/2*(beta/c - tau)**2`` otherwise, so a positive ``alpha`` never buys
    peace once ``beta/c`` exceeds the threshold.
    """
    (e_p, _), (e_c, _) = branch_optima(params, payoffs)
    rhs = 0.5 * params.c * (e_c * e_c - e_p * e_p) - params.beta * (e_c - e_p)
    return params.alpha <= rhs, rhs


def _case(prefers_peace: bool, params: CommanderParams, payoffs: PayoffMatrix) -> OutcomeCase:
    if params.unconstrained_optimum > payoffs.threshold:
        return OutcomeCase.CASE2 if prefers_peace else OutcomeCase.CASE4
    return OutcomeCase.CASE1 if prefers_peace else OutcomeCase.CASE3


def classify_outcome(params: CommanderParams, payoffs: PayoffMatrix) -> OutcomeCase:
    """Which of the four outcome cases the parameters fall into.

    ``beta/c`` at or below the threshold gives Case 1 (peace) or Case 3
    (conflict at the threshold); above it gives Case 2 (peace at the
    threshold) or Case 4 (conflict at ``beta/c``). Case 2 needs ``alpha < 0``
    except on the measure-zero edge ``alpha == 0, beta/c == tau``, which
    falls in Case 1.
    """
    prefers_peace, _ = peace_condition(params, payoffs)
    return _case(prefers_peace, params, payoffs)


def optimal_enforcement(params: CommanderParams, payoffs: PayoffMatrix) -> StackelbergSolution:
    """Globally optimal enforcement for the commander.

    Compares the two branch optima; ties go to peace.

    Examples
    --------
    >>> sol = optimal_enforcement(CommanderParams(0.2, 1.0, 1.0), PayoffMatrix())
    >>> sol.regime.value, sol.e_star, sol.utility, sol.outcome_case.name
    ('Peace', 1.0, 0.5, 'CASE1')
    """
    peace, conflict = branch_optima(params, payoffs)
    # same comparison as peace_condition so the two can never disagree
    prefers_peace, rhs = peace_condition(params, payoffs)
    e_star, utility = peace if prefers_peace else conflict
    return StackelbergSolution(
        e_star=e_star,
        regime=StackelbergRegime.PEACE if prefers_peace else StackelbergRegime.CONFLICT,
        utility=utility,
        peace_candidate=peace,
        conflict_candidate=conflict,
        outcome_case=_case(prefers_peace, params, payoffs),
        peace_bound=rhs,
        threshold=payoffs.threshold,
    )

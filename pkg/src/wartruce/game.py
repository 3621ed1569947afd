"""Stage game between frontline units: payoffs, logistic propensity, expected payoff.

Two matched units each choose Truce (T) or Attack (A)::

            T       A
      T   R, R    S, V
      A   V, S    P, P

Only coordination (stag-hunt) orderings ``R > V`` and ``P > S`` are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

# exp(709) is the largest power of e representable as a double
THETA_CLAMP = 709.0


@dataclass(frozen=True)
class PayoffMatrix:
    """Material payoffs of the truce/attack game.

    Attributes
    ----------
    R : float
        Payoff when both units keep the truce.
    V : float
        Payoff of an attacker meeting a truce-maker.
    S : float
        Payoff of a truce-maker meeting an attacker.
    P : float
        Payoff when both attack.
    """

    R: float = 3.0
    V: float = 1.0
    S: float = 0.0
    P: float = 1.0

    def __post_init__(self):
        for name in ("R", "V", "S", "P"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"payoff {name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if not self.R > self.V:
            raise InvalidInputError(
                f"coordination ordering requires R > V, got R={self.R!r}, V={self.V!r}"
            )
        if not self.P > self.S:
            raise InvalidInputError(
                f"coordination ordering requires P > S, got P={self.P!r}, S={self.S!r}"
            )

    @property
    def threshold(self) -> float:
        """Enforcement level ``R - V`` at which full peace loses stability."""
        return self.R - self.V

    @property
    def delta(self) -> float:
        """Slope ``(R - V) - (S - P)`` of the truce benefit in mean cooperation."""
        return (self.R - self.V) - (self.S - self.P)

    def with_threshold(self, tau: float) -> "PayoffMatrix":
        """Return a copy with ``R`` moved so that ``R - V == tau``."""
        return PayoffMatrix(R=self.V + tau, V=self.V, S=self.S, P=self.P)


def check_enforcement(e: float) -> float:
    e = float(e)
    if not math.isfinite(e) or e < 0.0:
        raise InvalidInputError(f"enforcement e must be finite and >= 0, got {e!r}")
    return e


def check_pbar(pbar: float) -> float:
    pbar = float(pbar)
    if not (0.0 <= pbar <= 1.0):
        raise InvalidInputError(f"mean cooperation pbar must lie in [0, 1], got {pbar!r}")
    return pbar


def propensity(theta):
    """Probability that a type-``theta`` unit chooses Truce, ``1 / (1 + exp(-theta))``.

    Accepts a scalar or an array. ``theta`` is clamped to ``[-709, 709]``
    before exponentiation.
    """
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("theta must be finite")
    clipped = np.clip(arr, -THETA_CLAMP, THETA_CLAMP)
    out = 1.0 / (1.0 + np.exp(-clipped))
    if out.ndim == 0:
        return float(out)
    return out


def attack_payoff(pbar: float, payoffs: PayoffMatrix) -> float:
    """Payoff of a unit that always attacks, ``pbar*V + (1 - pbar)*P``."""
    pbar = check_pbar(pbar)
    return pbar * payoffs.V + (1.0 - pbar) * payoffs.P


def truce_benefit(pbar: float, e: float, payoffs: PayoffMatrix) -> float:
    """Net benefit of Truce over always attacking.

    ``B(pbar, e) = pbar*(R - V) + (1 - pbar)*(S - P) - e``, affine in ``pbar``
    with slope ``payoffs.delta``.
    """
    pbar = check_pbar(pbar)
    e = check_enforcement(e)
    return pbar * (payoffs.R - payoffs.V) + (1.0 - pbar) * (payoffs.S - payoffs.P) - e


def expected_payoff(theta, pbar: float, e: float, payoffs: PayoffMatrix):
    """Expected payoff of type ``theta`` against a population with mean cooperation ``pbar``.

    Computed as ``attack_payoff + propensity(theta) * truce_benefit``.
    ``theta`` may be an array.
    """
    return attack_payoff(pbar, payoffs) + propensity(theta) * truce_benefit(pbar, e, payoffs)

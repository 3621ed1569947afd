"""Evolutionary dynamics of local truces under hierarchical enforcement."""

from .command import (
    CommanderParams,
    OutcomeCase,
    StackelbergRegime,
    StackelbergSolution,
    classify_outcome,
    commander_utility,
    optimal_enforcement,
    peace_condition,
)
from .dynamics import (
    DensityState,
    StrategyGrid,
    Trajectory,
    aggregate_velocity,
    density_step,
    gaussian_density,
    mean_cooperation,
    mixture_density,
    propensity_variance,
    simulate_aggregate,
    simulate_density,
    two_point_density,
)
from .equilibria import (
    BifurcationRow,
    Equilibrium,
    EquilibriumReport,
    Regime,
    Stability,
    analyze,
    basin_threshold,
    bifurcation_sweep,
    interior_equilibrium,
    stability_derivative,
)
from .errors import (
    DegenerateStateError,
    InvalidInputError,
    InvalidStateError,
    NumericError,
    StepSizeError,
    WartruceError,
)
from .game import PayoffMatrix, attack_payoff, expected_payoff, propensity, truce_benefit
from .policy import (
    LeverResult,
    critical_alpha,
    critical_beta,
    critical_cost,
    critical_threshold,
    lever_report,
)

__version__ = "0.1.0"

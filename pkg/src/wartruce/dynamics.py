"""Replicator dynamics at two levels of description.

The density level evolves ``f(theta, t)`` on a uniform theta grid with the
replicator equation ``df/dt = f * (Pi(theta) - mean Pi)`` (explicit Euler,
clipping and renormalisation). The aggregate level integrates the reduced ODE

    dpbar/dt = pbar * (1 - pbar) * (delta * pbar + (S - P) - e)

with classical fixed-step RK4. Along the exact density flow the mean obeys
``dpbar/dt = B(pbar, e) * Var[p]``; the reduced ODE replaces ``Var[p]`` by
``pbar * (1 - pbar)``, which is exact only for two-point densities with
``p`` in ``{0, 1}``. Simulated densities report the realised ``Var[p]`` so the
gap stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DegenerateStateError, InvalidInputError, InvalidStateError, StepSizeError
from .game import PayoffMatrix, check_enforcement, check_pbar, expected_payoff, propensity

MASS_TOL = 1e-10
STABILITY_GUARD = 0.1
MAX_SAMPLES = 2000

TWO_POINT_PEAK = 12.0
TWO_POINT_SIGMA = 0.25


@dataclass(frozen=True)
class StrategyGrid:
    """Uniform discretisation of the strategy axis."""

    theta_min: float = -8.0
    theta_max: float = 8.0
    n: int = 401

    def __post_init__(self):
        if not (math.isfinite(self.theta_min) and math.isfinite(self.theta_max)):
            raise InvalidInputError("grid bounds must be finite")
        if not self.theta_min < self.theta_max:
            raise InvalidInputError(
                f"grid requires theta_min < theta_max, got {self.theta_min!r} >= {self.theta_max!r}"
            )
        if int(self.n) != self.n or self.n < 3:
            raise InvalidInputError(f"grid requires an integer n >= 3, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return (self.theta_max - self.theta_min) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.theta_min, self.theta_max, self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Trapezoidal weights, so that ``quad_weights @ f`` integrates ``f``."""
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        w.flags.writeable = False
        return w

    @cached_property
    def propensities(self) -> np.ndarray:
        p = propensity(self.nodes)
        p.flags.writeable = False
        return p

    def integrate(self, values) -> float:
        return float(self.quad_weights @ np.asarray(values, dtype=float))


DEFAULT_GRID = StrategyGrid()
TWO_POINT_GRID = StrategyGrid(-16.0, 16.0, 641)


@dataclass(frozen=True, eq=False)
class DensityState:
    """Strategy density sampled at the grid nodes at time ``t``."""

    grid: StrategyGrid
    weights: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.grid.n,):
            raise InvalidStateError(
                f"density has {w.shape} values, grid has {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(w)):
            raise InvalidStateError("density values must be finite")
        if np.any(w < 0.0):
            raise InvalidStateError("density values must be non-negative")
        mass = self.grid.integrate(w)
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidStateError(f"density mass is {mass!r}, expected 1 within {MASS_TOL}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "t", float(self.t))

    @property
    def mass(self) -> float:
        return self.grid.integrate(self.weights)


def normalized(grid: StrategyGrid, values, t: float = 0.0) -> DensityState:
    """Build a density from non-negative node values by rescaling to unit mass."""
    w = np.asarray(values, dtype=float)
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise InvalidStateError("density values must be finite and non-negative")
    mass = grid.integrate(w)
    if not mass > 0.0:
        raise DegenerateStateError("density has zero mass on the grid")
    return DensityState(grid, w / mass, t)


def gaussian_density(grid: StrategyGrid = DEFAULT_GRID, mean: float = 0.0,
                     sigma: float = 1.0, t: float = 0.0) -> DensityState:
    return mixture_density(grid, [(1.0, mean, sigma)], t)


def mixture_density(grid: StrategyGrid, components, t: float = 0.0) -> DensityState:
    """Gaussian mixture given as ``(weight, mean, sigma)`` triples, renormalised on the grid."""
    x = grid.nodes
    values = np.zeros(grid.n)
    for weight, mean, sigma in components:
        if not sigma > 0.0:
            raise InvalidInputError(f"sigma must be positive, got {sigma!r}")
        if weight < 0.0:
            raise InvalidInputError(f"mixture weight must be non-negative, got {weight!r}")
        values += weight * np.exp(-0.5 * ((x - mean) / sigma) ** 2) / sigma
    return normalized(grid, values, t)


def two_point_density(weight_high: float = 0.5, grid: StrategyGrid = TWO_POINT_GRID,
                      peak: float = TWO_POINT_PEAK, sigma: float = TWO_POINT_SIGMA) -> DensityState:
    """Two narrow peaks at ``+peak`` (mass ``weight_high``) and ``-peak``.

    This is the near-Bernoulli case in which the aggregate ODE is an accurate
    reduction of the density dynamics.
    """
    if not 0.0 <= weight_high <= 1.0:
        raise InvalidInputError(f"weight_high must lie in [0, 1], got {weight_high!r}")
    if not (grid.theta_min <= -peak and peak <= grid.theta_max):
        raise InvalidInputError(
            f"two-point peaks at +/-{peak} fall outside the grid "
            f"[{grid.theta_min}, {grid.theta_max}]"
        )
    # peaks are normalised separately so the mass split is exact on the grid
    parts = []
    for center in (peak, -peak):
        bump = np.exp(-0.5 * ((grid.nodes - center) / sigma) ** 2)
        parts.append(bump / grid.integrate(bump))
    return DensityState(grid, weight_high * parts[0] + (1.0 - weight_high) * parts[1])


def two_point_weight_for(pbar: float, peak: float = TWO_POINT_PEAK) -> float:
    """Mass on the high peak that gives mean cooperation ``pbar`` (in the narrow-peak limit)."""
    lo, hi = propensity(-peak), propensity(peak)
    return min(1.0, max(0.0, (pbar - lo) / (hi - lo)))


def mean_cooperation(d: DensityState) -> float:
    """Population mean of the truce propensity, by trapezoidal quadrature."""
    _require_density(d)
    return d.grid.integrate(d.grid.propensities * d.weights)


def propensity_variance(d: DensityState) -> float:
    """Variance of the truce propensity across the population.

    Bounded above by ``pbar * (1 - pbar)``; the bound is attained only by
    two-point densities with propensities at 0 and 1.
    """
    _require_density(d)
    p = d.grid.propensities
    pbar = d.grid.integrate(p * d.weights)
    return d.grid.integrate((p - pbar) ** 2 * d.weights)


def mean_payoff(d: DensityState, e: float, payoffs: PayoffMatrix) -> float:
    """Population-average expected payoff."""
    pbar = _clip01(mean_cooperation(d))
    return d.grid.integrate(expected_payoff(d.grid.nodes, pbar, e, payoffs) * d.weights)


def _require_density(d):
    if not isinstance(d, DensityState):
        raise InvalidStateError(f"expected a DensityState, got {type(d).__name__}")


def _clip01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _euler_weights(d: DensityState, e: float, payoffs: PayoffMatrix, dt: float) -> np.ndarray:
    grid, f = d.grid, d.weights
    pbar = _clip01(grid.integrate(grid.propensities * f))
    fitness = expected_payoff(grid.nodes, pbar, e, payoffs)
    advantage = fitness - grid.integrate(fitness * f)
    worst = float(np.max(np.abs(advantage)))
    if dt * worst > STABILITY_GUARD:
        raise StepSizeError(
            f"dt={dt!r} violates the stability guard: dt * max|Pi - mean Pi| = "
            f"{dt * worst:.6g} > {STABILITY_GUARD}"
        )
    f_new = np.clip(f * (1.0 + dt * advantage), 0.0, None)
    mass = grid.integrate(f_new)
    if not mass > 0.0:
        raise DegenerateStateError("density collapsed to zero mass after clipping")
    return f_new / mass


def density_step(d: DensityState, e: float, payoffs: PayoffMatrix, dt: float) -> DensityState:
    """Advance the density by one explicit Euler step of the replicator equation.

    Raises
    ------
    StepSizeError
        If ``dt <= 0`` or ``dt * max|Pi - mean Pi| > 0.1``.
    DegenerateStateError
        If no mass survives clipping.
    """
    _require_density(d)
    e = check_enforcement(e)
    dt = _check_dt(dt, StepSizeError)
    return DensityState(d.grid, _euler_weights(d, e, payoffs, dt), d.t + dt)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled time series of a simulation.

    Aggregate runs fill ``t`` and ``pbar`` only; density runs also carry the
    propensity variance and mean payoff at each sample.
    """

    t: np.ndarray
    pbar: np.ndarray
    var_p: Optional[np.ndarray] = None
    mean_payoff: Optional[np.ndarray] = None
    final_state: Optional[DensityState] = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        pbar = np.asarray(self.pbar, dtype=float)
        if t.ndim != 1 or t.shape != pbar.shape or t.size == 0:
            raise InvalidInputError("trajectory needs matching non-empty 1-d t and pbar")
        if np.any(np.diff(t) <= 0.0):
            raise InvalidInputError("trajectory times must be strictly increasing")
        if np.any((pbar < 0.0) | (pbar > 1.0)):
            raise InvalidInputError("trajectory pbar values must lie in [0, 1]")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "pbar", pbar)
        for name in ("var_p", "mean_payoff"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != t.shape:
                    raise InvalidInputError(f"{name} must match t in length")
                object.__setattr__(self, name, v)
        if self.var_p is not None and np.any(self.var_p < 0.0):
            raise InvalidInputError("var_p must be non-negative")

    @property
    def is_density(self) -> bool:
        return self.var_p is not None

    @property
    def final_pbar(self) -> float:
        return float(self.pbar[-1])

    def __len__(self):
        return self.t.size


def _check_dt(dt, exc=InvalidInputError) -> float:
    dt = float(dt)
    if not (math.isfinite(dt) and dt > 0.0):
        raise exc(f"dt must be positive and finite, got {dt!r}")
    return dt


def _schedule(t_end: float, dt: float, sample_interval: Optional[float]):
    """Step sizes and the indices of steps after which a sample is taken."""
    t_end = float(t_end)
    if not (math.isfinite(t_end) and t_end > 0.0):
        raise InvalidInputError(f"t_end must be positive and finite, got {t_end!r}")
    if sample_interval is None:
        sample_interval = max(dt, t_end / MAX_SAMPLES)
    elif not sample_interval > 0.0:
        raise InvalidInputError(f"sample_interval must be positive, got {sample_interval!r}")
    n_full = int(math.floor(t_end / dt + 1e-9))
    remainder = t_end - n_full * dt
    partial = remainder > 1e-9 * dt
    stride = max(1, int(round(sample_interval / dt)))
    return n_full, (remainder if partial else 0.0), stride


def simulate_density(d0: DensityState, e: float, payoffs: PayoffMatrix, t_end: float,
                     dt: float, sample_interval: Optional[float] = None) -> Trajectory:
    """Integrate the density replicator equation from ``d0`` until ``t0 + t_end``.

    Samples ``(t, pbar, Var[p], mean payoff)`` every ``sample_interval``
    (default ``max(dt, t_end / 2000)``) and always at the final time.
    """
    _require_density(d0)
    e = check_enforcement(e)
    dt = _check_dt(dt, StepSizeError)
    n_full, tail, stride = _schedule(t_end, dt, sample_interval)
    t0 = d0.t
    ts, ps, vs, ms = [], [], [], []

    def record(state):
        ts.append(state.t)
        ps.append(_clip01(mean_cooperation(state)))
        vs.append(propensity_variance(state))
        ms.append(mean_payoff(state, e, payoffs))

    state = d0
    record(state)
    for k in range(1, n_full + 1):
        state = DensityState(state.grid, _euler_weights(state, e, payoffs, dt), t0 + k * dt)
        if k % stride == 0 or (k == n_full and tail == 0.0):
            record(state)
    if tail:
        state = DensityState(state.grid, _euler_weights(state, e, payoffs, tail), t0 + float(t_end))
        record(state)
    return Trajectory(np.array(ts), np.array(ps), np.array(vs), np.array(ms), final_state=state)


def _velocity(p, e, delta, s_minus_p):
    return p * (1.0 - p) * (delta * p + s_minus_p - e)


def aggregate_velocity(pbar: float, e: float, payoffs: PayoffMatrix) -> float:
    """Right-hand side ``g(pbar) = pbar*(1 - pbar)*(delta*pbar + (S - P) - e)``."""
    pbar = check_pbar(pbar)
    e = check_enforcement(e)
    return _velocity(pbar, e, payoffs.delta, payoffs.S - payoffs.P)


def _rk4(p, h, e, delta, s_minus_p, clamp):
    k1 = _velocity(p, e, delta, s_minus_p)
    k2 = _velocity(p + 0.5 * h * k1, e, delta, s_minus_p)
    k3 = _velocity(p + 0.5 * h * k2, e, delta, s_minus_p)
    k4 = _velocity(p + h * k3, e, delta, s_minus_p)
    return clamp(p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _clamp_scalar(x):
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _clamp_array(x):
    return np.clip(x, 0.0, 1.0)


def simulate_aggregate(p0: float, e: float, payoffs: PayoffMatrix, t_end: float, dt: float,
                       sample_interval: Optional[float] = None) -> Trajectory:
    """Integrate the aggregate ODE with fixed-step RK4, clamping to ``[0, 1]`` after each step."""
    p = check_pbar(p0)
    e = check_enforcement(e)
    dt = _check_dt(dt)
    n_full, tail, stride = _schedule(t_end, dt, sample_interval)
    delta, s_minus_p = payoffs.delta, payoffs.S - payoffs.P
    ts, ps = [0.0], [p]
    for k in range(1, n_full + 1):
        p = _rk4(p, dt, e, delta, s_minus_p, _clamp_scalar)
        if k % stride == 0 or (k == n_full and tail == 0.0):
            ts.append(k * dt)
            ps.append(p)
    if tail:
        p = _rk4(p, tail, e, delta, s_minus_p, _clamp_scalar)
        ts.append(float(t_end))
        ps.append(p)
    return Trajectory(np.array(ts), np.array(ps))


def aggregate_endpoint(p0, e, payoffs: PayoffMatrix, t_end: float, dt: float):
    """Final mean cooperation of the aggregate ODE, vectorised over ``p0`` and ``e``.

    Uses the same RK4 steps as :func:`simulate_aggregate` without recording
    samples, so many initial conditions can be integrated at once.
    """
    out = endpoint_batch(p0, e, payoffs.delta, payoffs.S - payoffs.P, t_end, dt)
    return float(out) if out.ndim == 0 else out


def endpoint_batch(p0, e, delta, s_minus_p, t_end: float, dt: float) -> np.ndarray:
    """Broadcasting RK4 endpoint over arrays of ``p0``, ``e`` and payoff summaries."""
    p = np.asarray(p0, dtype=float)
    e = np.asarray(e, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)):
        raise InvalidInputError("p0 must lie in [0, 1]")
    if np.any(e < 0.0) or not np.all(np.isfinite(e)):
        raise InvalidInputError("enforcement e must be finite and >= 0")
    dt = _check_dt(dt)
    n_full, tail, _ = _schedule(t_end, dt, None)
    p, e, delta, s_minus_p = (np.array(a, dtype=float) for a in
                              np.broadcast_arrays(p, e, np.asarray(delta, dtype=float),
                                                  np.asarray(s_minus_p, dtype=float)))
    for _ in range(n_full):
        p = _rk4(p, dt, e, delta, s_minus_p, _clamp_array)
    if tail:
        p = _rk4(p, tail, e, delta, s_minus_p, _clamp_array)
    return p


ATTRACTOR_TOL = 1e-3


def attractor_label(pbar: float, tol: float = ATTRACTOR_TOL) -> str:
    """Name the boundary equilibrium ``pbar`` has reached, or ``"undecided"``."""
    if abs(pbar - 1.0) <= tol:
        return "peace (1)"
    if abs(pbar) <= tol:
        return "conflict (0)"
    return "undecided"

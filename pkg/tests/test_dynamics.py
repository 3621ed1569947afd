import numpy as np
import pytest

from oracles import MEAN_COOPERATION_GOLDEN, simulate_endpoint_python, velocity_poly
from wartruce import (
    DegenerateStateError,
    DensityState,
    InvalidInputError,
    InvalidStateError,
    PayoffMatrix,
    StepSizeError,
    StrategyGrid,
    aggregate_velocity,
    density_step,
    gaussian_density,
    mean_cooperation,
    mixture_density,
    propensity_variance,
    simulate_aggregate,
    simulate_density,
    truce_benefit,
    two_point_density,
)
from wartruce.dynamics import (
    aggregate_endpoint,
    attractor_label,
    normalized,
    two_point_weight_for,
)

DEFAULT = PayoffMatrix(3, 1, 0, 1)
WIDE = StrategyGrid(-16, 16, 6401)


def random_mixture(rng, grid):
    k = rng.integers(1, 4)
    comps = [(rng.uniform(0.1, 1), rng.uniform(-5, 5), rng.uniform(0.3, 2.5)) for _ in range(k)]
    return mixture_density(grid, comps)


class TestGridAndState:
    def test_grid_spacing_and_defaults(self):
        g = StrategyGrid()
        assert (g.theta_min, g.theta_max, g.n) == (-8.0, 8.0, 401)
        assert g.spacing == pytest.approx(0.04)
        assert g.nodes[0] == -8.0 and g.nodes[-1] == 8.0
        assert g.integrate(np.ones(g.n)) == pytest.approx(16.0, rel=1e-14)

    @pytest.mark.parametrize("args", [(1, 1, 5), (2, 1, 5), (0, 1, 2), (0, 1, 3.5)])
    def test_invalid_grid(self, args):
        with pytest.raises(InvalidInputError):
            StrategyGrid(*args)

    def test_negative_weight_rejected(self):
        g = StrategyGrid(-1, 1, 3)
        with pytest.raises(InvalidStateError, match="non-negative"):
            DensityState(g, [-0.1, 1.0, 0.1])

    def test_unnormalised_weight_rejected(self):
        g = StrategyGrid(-1, 1, 3)
        with pytest.raises(InvalidStateError, match="mass"):
            DensityState(g, [1.0, 1.0, 1.0])

    def test_zero_mass_is_degenerate(self):
        with pytest.raises(DegenerateStateError):
            normalized(StrategyGrid(), np.zeros(401))

    def test_weights_are_immutable(self):
        d = gaussian_density()
        with pytest.raises(ValueError):
            d.weights[0] = 1.0

    def test_operations_reject_non_density(self):
        with pytest.raises(InvalidStateError):
            mean_cooperation(np.ones(401))


class TestMoments:
    def test_symmetric_density_has_half_cooperation(self):
        assert mean_cooperation(gaussian_density()) == pytest.approx(0.5, abs=1e-6)

    def test_narrow_peak_at_high_theta(self):
        d = gaussian_density(WIDE, 12.0, 0.05)
        assert abs(mean_cooperation(d) - 1.0) <= 1e-4

    def test_golden_value_against_refined_quadrature(self):
        d = gaussian_density(StrategyGrid(-10, 10, 2001), 1.0, 1.0)
        assert mean_cooperation(d) == pytest.approx(MEAN_COOPERATION_GOLDEN, abs=1e-10)

    def test_point_mass_has_no_variance(self):
        d = gaussian_density(WIDE, 0.5, 0.01)
        # delta method: Var[p] ~ (p'(0.5) * sigma)^2
        slope = 1 / (1 + np.exp(-0.5)) * (1 - 1 / (1 + np.exp(-0.5)))
        assert propensity_variance(d) < 1e-5
        assert propensity_variance(d) == pytest.approx((slope * 0.01) ** 2, rel=1e-2)

    def test_two_narrow_peaks_are_bernoulli(self):
        d = mixture_density(WIDE, [(1, 12, 0.05), (1, -12, 0.05)])
        pbar = mean_cooperation(d)
        assert pbar == pytest.approx(0.5, abs=1e-9)
        assert propensity_variance(d) == pytest.approx(0.25, abs=1e-4)

    def test_gaussian_variance_below_bernoulli_bound(self):
        d = gaussian_density(StrategyGrid(-12, 12, 4001), 0.0, 1.0)
        var = propensity_variance(d)
        # refined-quadrature oracle for E[p^2] - 1/4
        x = np.linspace(-12, 12, 400001)
        f = np.exp(-0.5 * x ** 2)
        p = 1 / (1 + np.exp(-x))
        ref = np.trapezoid((p - 0.5) ** 2 * f, x) / np.trapezoid(f, x)
        assert var == pytest.approx(ref, rel=1e-8)
        assert var < 0.25

    def test_variance_bound_on_random_mixtures(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            d = random_mixture(rng, StrategyGrid())
            pbar = mean_cooperation(d)
            assert 0.0 < pbar < 1.0
            assert 0.0 <= propensity_variance(d) <= pbar * (1 - pbar) + 1e-15

    def test_two_point_preset_weight(self):
        d = two_point_density(two_point_weight_for(0.9))
        assert mean_cooperation(d) == pytest.approx(0.9, abs=1e-6)
        assert propensity_variance(d) == pytest.approx(0.09, abs=1e-4)

    def test_two_point_preset_needs_wide_grid(self):
        with pytest.raises(InvalidInputError, match="outside the grid"):
            two_point_density(0.5, StrategyGrid())


class TestDensityStep:
    def test_zero_benefit_leaves_density_unchanged(self):
        d = gaussian_density()
        e = 0.5  # B(1/2, 1/2) = 0 for the default payoffs
        assert truce_benefit(0.5, e, DEFAULT) == 0.0
        d1 = density_step(d, e, DEFAULT, 0.01)
        assert np.max(np.abs(d1.weights - d.weights)) <= 1e-12
        assert d1.t == pytest.approx(0.01)

    @pytest.mark.parametrize("e", [0.0, 0.2])
    def test_positive_benefit_raises_cooperation(self, e):
        d = gaussian_density(StrategyGrid(), 1.0, 1.0)
        pbar = mean_cooperation(d)
        assert truce_benefit(pbar, e, DEFAULT) > 0
        assert mean_cooperation(density_step(d, e, DEFAULT, 0.01)) > pbar

    @pytest.mark.parametrize("e", [0.0, 1.0, 3.0])
    def test_negative_benefit_lowers_cooperation(self, e):
        d = gaussian_density(StrategyGrid(), -1.0, 1.0)
        pbar = mean_cooperation(d)
        assert truce_benefit(pbar, e, DEFAULT) < 0
        assert mean_cooperation(density_step(d, e, DEFAULT, 0.01)) < pbar

    def test_mean_identity_per_step(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            d = random_mixture(rng, StrategyGrid())
            e = rng.uniform(0, 3)
            dt = 0.01
            pbar = mean_cooperation(d)
            rate = (mean_cooperation(density_step(d, e, DEFAULT, dt)) - pbar) / dt
            expected = truce_benefit(pbar, e, DEFAULT) * propensity_variance(d)
            assert abs(rate - expected) <= 1e-3 * abs(expected) + 1e-12

    def test_stability_guard(self):
        d = gaussian_density()
        with pytest.raises(StepSizeError, match="stability guard"):
            density_step(d, 10.0, DEFAULT, 1.0)
        with pytest.raises(StepSizeError):
            density_step(d, 0.0, DEFAULT, 0.0)

    def test_mass_preserved_over_many_steps(self):
        d = gaussian_density(StrategyGrid(), 0.3, 1.5)
        for _ in range(10_000):
            d = density_step(d, 0.4, DEFAULT, 0.01)
        assert abs(d.mass - 1.0) <= 1e-8
        assert np.all(d.weights >= 0)


class TestSimulateDensity:
    def test_strong_enforcement_drives_cooperation_down(self):
        traj = simulate_density(gaussian_density(StrategyGrid(), 2.0, 1.0), 2.5, DEFAULT, 20.0, 0.01)
        assert np.all(np.diff(traj.pbar) < 0)
        assert traj.final_pbar < traj.pbar[0]

    @pytest.mark.parametrize("p0,target", [(0.9, 1.0), (0.1, 0.0)])
    def test_two_point_converges_to_predicted_attractor(self, p0, target):
        d = two_point_density(two_point_weight_for(p0))
        traj = simulate_density(d, 0.0, DEFAULT, 100.0, 0.01)
        assert abs(traj.final_pbar - target) <= 1e-3

    def test_samples_and_times(self):
        traj = simulate_density(gaussian_density(), 0.0, DEFAULT, 1.0, 0.01, sample_interval=0.1)
        np.testing.assert_allclose(traj.t, np.linspace(0, 1, 11), atol=1e-12)
        assert traj.is_density and len(traj) == 11
        assert np.all(traj.var_p <= traj.pbar * (1 - traj.pbar) + 1e-15)

    def test_partial_final_step_lands_on_t_end(self):
        traj = simulate_density(gaussian_density(), 0.0, DEFAULT, 0.105, 0.01)
        assert traj.t[-1] == pytest.approx(0.105)
        assert traj.final_state.t == pytest.approx(0.105)

    def test_default_sampling_is_bounded(self):
        traj = simulate_aggregate(0.5, 0.0, DEFAULT, 200.0, 0.01)
        assert len(traj) == 2001

    def test_bernoulli_limit_tracks_aggregate(self):
        for p0, e in [(0.9, 0.0), (0.5, 1.0), (0.7, 3.0)]:
            d = two_point_density(two_point_weight_for(p0))
            td = simulate_density(d, e, DEFAULT, 50.0, 0.01, sample_interval=0.01)
            ta = simulate_aggregate(mean_cooperation(d), e, DEFAULT, 50.0, 0.01, sample_interval=0.01)
            np.testing.assert_allclose(td.t, ta.t, atol=1e-9)
            assert np.max(np.abs(td.pbar - ta.pbar)) <= 1e-2


class TestAggregate:
    def test_velocity_examples(self):
        assert aggregate_velocity(0.0, 0.3, DEFAULT) == 0.0
        assert aggregate_velocity(1.0, 0.3, DEFAULT) == 0.0
        pint = (0.3 + DEFAULT.P - DEFAULT.S) / DEFAULT.delta
        assert abs(aggregate_velocity(pint, 0.3, DEFAULT)) <= 1e-12
        assert aggregate_velocity(0.5, 0.0, DEFAULT) == pytest.approx(0.125, abs=1e-15)
        assert aggregate_velocity(0.5, 0.0, DEFAULT) == pytest.approx(
            truce_benefit(0.5, 0.0, DEFAULT) * 0.25, abs=1e-15)

    def test_velocity_matches_expanded_polynomial(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            p, e = rng.uniform(0, 1), rng.uniform(0, 4)
            assert aggregate_velocity(p, e, DEFAULT) == pytest.approx(
                velocity_poly(p, e, 3, 1, 0, 1), abs=1e-14)

    @pytest.mark.parametrize("p0", [0.0, 1.0])
    def test_boundary_fixed_points_are_constant(self, p0):
        traj = simulate_aggregate(p0, 0.7, DEFAULT, 10.0, 0.01)
        assert np.all(traj.pbar == p0)

    def test_peace_attracts_from_high_start(self):
        assert simulate_aggregate(0.9, 0.0, DEFAULT, 200.0, 0.01).final_pbar >= 1 - 1e-4

    def test_trajectories_split_around_interior_point(self):
        up = simulate_aggregate(0.34, 0.0, DEFAULT, 200.0, 0.01).final_pbar
        down = simulate_aggregate(0.32, 0.0, DEFAULT, 200.0, 0.01).final_pbar
        assert up > 1 - 1e-3 and down < 1e-3

    def test_invalid_dt_and_start(self):
        with pytest.raises(InvalidInputError):
            simulate_aggregate(0.5, 0.0, DEFAULT, 1.0, 0.0)
        with pytest.raises(InvalidInputError):
            simulate_aggregate(1.5, 0.0, DEFAULT, 1.0, 0.1)
        with pytest.raises(InvalidInputError):
            simulate_aggregate(0.5, 0.0, DEFAULT, -1.0, 0.1)

    def test_matches_independent_rk4(self):
        for p0, e in [(0.2, 0.0), (0.6, 0.5), (0.95, 2.5)]:
            ours = simulate_aggregate(p0, e, DEFAULT, 20.0, 0.01).final_pbar
            ref = simulate_endpoint_python(p0, e, 3, 1, 0, 1, 20.0, 0.01)
            assert ours == pytest.approx(ref, abs=1e-12)

    def test_vectorised_endpoint_matches_scalar(self):
        p0 = np.array([0.1, 0.4, 0.8])
        batch = aggregate_endpoint(p0, 0.2, DEFAULT, 30.0, 0.01)
        for p, b in zip(p0, batch):
            assert b == pytest.approx(simulate_aggregate(p, 0.2, DEFAULT, 30.0, 0.01).final_pbar, abs=1e-14)

    def test_fourth_order_convergence(self):
        p0, e, t_end = 0.2, 0.0, 5.0
        ref = simulate_aggregate(p0, e, DEFAULT, t_end, 1e-5, sample_interval=t_end).final_pbar
        err = [abs(simulate_aggregate(p0, e, DEFAULT, t_end, h, sample_interval=t_end).final_pbar - ref)
               for h in (0.2, 0.1)]
        assert 12.0 < err[0] / err[1] < 20.0


@pytest.mark.parametrize("value,label", [(1 - 5e-4, "peace (1)"), (5e-4, "conflict (0)"),
                                         (0.5, "undecided"), (2e-3, "undecided")])
def test_attractor_label(value, label):
    assert attractor_label(value) == label

# dynamics/tests.py
# Tests de la réponse logit et du simulateur Monte-Carlo

import math

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings, tag

from chains.services.birth_death_service import BirthDeathService
from chains.services.bounds_service import BoundsService
from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from games.domain import GameConfig
from .records import DynamicsState, TrajectoryRecord
from .serializers import HittingEstimateSerializer, SweepResultSerializer
from .services.logit_service import LogitService
from .services.simulation_service import SimulationService, trial_generator


def threshold_config(n=10, tau=5, v_high=100.0, alpha=1.0, rho=0.5, beta=1.0, costs=None):
    return GameConfig.build(
        n=n, costs=alpha if costs is None else costs, rho=rho, t_tot=10.0, beta=beta,
        technology={'kind': 'threshold', 'params': {'tau': tau, 'v_low': 0.0, 'v_high': v_high}},
    )


def and_game(beta=1.0):
    return GameConfig.build(n=2, costs=1.0, rho=1.0, t_tot=1.0, beta=beta,
                            technology={'kind': 'table', 'params': {'values': [0.0, 0.0, 8.0]}})


def graded_config(beta=1.0):
    return GameConfig.build(n=3, costs=[0.5, 1.0, 1.5], rho=0.8, t_tot=1.0, beta=beta,
                            actions=[0.0, 0.5, 1.0], technology={'kind': 'quadratic', 'params': {'tau': 1.5}})


class LogitResponseTests(SimpleTestCase):

    def test_uniform_at_zero_beta(self):
        probs = LogitService.logit_response(threshold_config(beta=0.0), (0.0,) * 10, 3)
        np.testing.assert_array_equal(probs, [0.5, 0.5])

    def test_and_game_probabilities(self):
        probs = LogitService.logit_response(and_game(), (0.0, 1.0), 0)
        self.assertAlmostEqual(probs[0], 1 / (1 + math.exp(3)), places=12)
        self.assertAlmostEqual(probs[1], math.exp(3) / (1 + math.exp(3)), places=12)
        self.assertAlmostEqual(round(probs[0], 4), 0.0474)

    def test_large_beta_approaches_best_response(self):
        probs = LogitService.logit_response(and_game(beta=1e6), (0.0, 1.0), 0)
        self.assertGreaterEqual(probs[1], 1 - 1e-9)
        graded = LogitService.logit_response(graded_config(beta=1e6), (1.0, 0.0, 0.5), 1)
        utilities = LogitService.utilities(graded_config(), (1.0, 0.0, 0.5), 1)
        self.assertGreaterEqual(graded[int(np.argmax(utilities))], 1 - 1e-9)

    def test_distributions_sum_to_one(self):
        config = graded_config(beta=3.0)
        rng = np.random.default_rng(2)
        for _ in range(50):
            profile = tuple(float(x) for x in rng.choice([0.0, 0.5, 1.0], size=3))
            for i in range(3):
                self.assertAlmostEqual(LogitService.logit_response(config, profile, i).sum(), 1.0, delta=1e-12)


class TransitionKernelTests(SimpleTestCase):

    def test_zero_beta_is_uniform_resampling(self):
        config = threshold_config(n=3, tau=2, beta=0.0)
        kernel = LogitService.transition_kernel(config)
        np.testing.assert_allclose(kernel.sum(axis=1), 1.0, atol=1e-14)
        np.testing.assert_allclose(np.diag(kernel), 0.5, atol=1e-14)
        # 000 → 100 (premier joueur) : 1/n · 1/2
        self.assertAlmostEqual(kernel[0, 4], 1 / 6, places=14)
        self.assertEqual(kernel[0, 3], 0.0)

    def test_gibbs_measure_is_stationary(self):
        config = graded_config(beta=2.0)
        kernel = LogitService.transition_kernel(config)
        gibbs = LogitService.gibbs_measure(config)
        np.testing.assert_allclose(gibbs @ kernel, gibbs, atol=1e-12)

    def test_lumped_kernel_detailed_balance(self):
        config = threshold_config(n=6, tau=3, v_high=30.0, beta=1.4)
        kernel = LogitService.transition_kernel(config)
        levels = np.rint(LogitService.level_of_states(config)).astype(int)
        lumped = BirthDeathService.lumped_kernel(config)
        law = BirthDeathService.stationary(config).probs
        for ell in range(6):
            source = int(np.flatnonzero(levels == ell)[0])
            up = kernel[source, levels == ell + 1].sum()
            down = kernel[int(np.flatnonzero(levels == ell + 1)[0]), levels == ell].sum()
            self.assertAlmostEqual(up, lumped[ell, ell + 1], places=12)
            self.assertAlmostEqual(down, lumped[ell + 1, ell], places=12)
            self.assertLess(abs(law[ell] * up - law[ell + 1] * down) / (law[ell] * up), 1e-10)

    def test_power_iteration_matches_closed_form(self):
        for config in (threshold_config(n=8, tau=4, v_high=10.0, alpha=0.5),
                       threshold_config(n=10, tau=5, v_high=20.0, alpha=0.5, beta=0.5)):
            measure = LogitService.stationary_by_power_iteration(config)
            lumped = LogitService.lump_by_level(config, measure)
            self.assertLessEqual(np.abs(lumped - BirthDeathService.stationary(config).probs).max(), 1e-8)


class StepTests(SimpleTestCase):

    def test_single_coordinate_update(self):
        config = graded_config()
        rng = trial_generator(3, 0)
        state = DynamicsState.of(config, (0.0, 0.5, 1.0))
        for _ in range(200):
            following = SimulationService.step(config, state, rng)
            changed = sum(a != b for a, b in zip(state.profile, following.profile))
            self.assertLessEqual(changed, 1)
            self.assertEqual(following.step, state.step + 1)
            self.assertAlmostEqual(following.ell, math.fsum(following.profile))
            state = following

    def test_fast_path_replays_generic_steps(self):
        configs = [
            threshold_config(n=7, tau=4, v_high=40.0, beta=1.3),
            threshold_config(n=5, tau=3, v_high=20.0, costs=[0.2, 0.9, 0.9, 1.4, 0.2]),
            and_game(),
        ]
        for config in configs:
            rng = trial_generator(11, 0)
            state = DynamicsState.of(config, (0.0,) * config.n)
            generic = []
            for _ in range(600):
                state = SimulationService.step(config, state, rng)
                generic.append(state.ell)
            trajectory = SimulationService.run_trajectory(config, 600, seed=11)
            np.testing.assert_array_equal(trajectory.ells[1:], generic)
            self.assertEqual(trajectory.final_profile, state.profile)

    def test_seed_determinism(self):
        config = threshold_config(n=12, tau=6)
        first = SimulationService.run_trajectory(config, 5000, seed=42, stride=7)
        second = SimulationService.run_trajectory(config, 5000, seed=42, stride=7)
        np.testing.assert_array_equal(first.ells, second.ells)
        np.testing.assert_array_equal(first.potentials, second.potentials)
        other = SimulationService.run_trajectory(config, 5000, seed=43, stride=7)
        self.assertFalse(np.array_equal(first.ells, other.ells))

    def test_trajectory_recording(self):
        config = threshold_config(n=6, tau=3, v_high=30.0)
        trajectory = SimulationService.run_trajectory(config, 100, seed=1, stride=10)
        self.assertEqual(list(trajectory.steps), list(range(0, 101, 10)))
        self.assertEqual(trajectory.ells[0], 0)
        for row in trajectory.rows():
            expected_value = 30.0 if row['ell'] >= 3 else 0.0
            self.assertEqual(row['value'], expected_value)
            self.assertAlmostEqual(row['potential'], 0.5 / 6 * expected_value - row['ell'])

    def test_generic_trajectory(self):
        trajectory = SimulationService.run_trajectory(graded_config(), 300, seed=5, stride=3)
        self.assertEqual(len(trajectory), 101)
        self.assertTrue(np.all(trajectory.ells <= 3.0))

    def test_rejects_empty_runs(self):
        with self.assertRaises(InvalidConfigError):
            SimulationService.run_trajectory(threshold_config(), 0, seed=1)
        with self.assertRaises(InvalidConfigError):
            SimulationService.run_trajectory(threshold_config(), 10, seed=1, stride=0)

    def test_drift_below_far_threshold(self):
        config = threshold_config(n=20, tau=20, alpha=1.0, beta=2.0)
        ell_star = BirthDeathService.ell_star(config)
        trajectory = SimulationService.run_trajectory(config, 10_000, seed=9, initial=(1.0,) * 15 + (0.0,) * 5)
        increments = np.diff(trajectory.ells)
        above = trajectory.ells[:-1] > ell_star + 1
        self.assertGreater(above.sum(), 100)
        self.assertLess(increments[above].mean(), 0.0)

    def test_mean_level_on_flat_region(self):
        config = threshold_config(n=20, tau=20, alpha=1.0, beta=1.0, rho=0.0)
        trajectory = SimulationService.run_trajectory(config, 200_000, seed=4)
        batches = np.array_split(trajectory.ells[1:], 50)
        means = np.array([batch.mean() for batch in batches])
        std_error = means.std(ddof=1) / math.sqrt(means.size)
        self.assertLess(abs(means.mean() - BirthDeathService.ell_star(config)), 3 * std_error)


class HittingEstimateTests(SimpleTestCase):

    def test_target_zero(self):
        estimate = SimulationService.estimate_hitting_time(threshold_config(), 0, trials=5, seed=1)
        self.assertEqual(estimate.mean, 0.0)
        self.assertEqual(estimate.successes, 5)

    def test_batches_share_trial_streams(self):
        config = threshold_config(n=10, tau=5, alpha=0.5)
        together = SimulationService.hitting_steps(config, 5, 10_000, 8, [0, 1, 2, 3])
        apart = [SimulationService.hitting_steps(config, 5, 10_000, 8, [k])[0] for k in range(4)]
        self.assertEqual(together, apart)

    def test_fast_hitting_matches_trajectory(self):
        config = threshold_config(n=10, tau=5, alpha=0.5)
        hits = SimulationService.hitting_steps(config, 4, 10_000, 21, [0, 1, 2])
        for trial, hit in enumerate(hits):
            trajectory = SimulationService.run_trajectory(config, hit, seed=21, trial=trial)
            self.assertEqual(trajectory.first_passage(4), hit)

    def test_independent_of_worker_count(self):
        config = threshold_config(n=10, tau=5, alpha=0.5)
        sequential = SimulationService.estimate_hitting_time(config, 5, trials=12, seed=3)
        with override_settings(AIRDROP_LAB={**settings.AIRDROP_LAB, 'THREADS': 3}):
            parallel = SimulationService.estimate_hitting_time(config, 5, trials=12, seed=3)
        self.assertEqual(sequential.samples, parallel.samples)

    def test_matches_exact_hitting(self):
        config = threshold_config(n=20, tau=10, v_high=40.0, alpha=0.5)
        exact = BirthDeathService.expected_hitting_exact(config, 0, 10).value
        estimate = SimulationService.estimate_hitting_time(config, 10, trials=300, seed=17)
        self.assertEqual(estimate.successes, 300)
        self.assertLess(abs(estimate.mean - exact), 3 * estimate.std_error)
        self.assertLess(estimate.ci_low, estimate.mean)

    def test_censored_trials_reported(self):
        config = threshold_config(n=30, tau=20, alpha=2.0, beta=1.0)
        with self.assertLogs('airdrop_lab', level='WARNING'):
            estimate = SimulationService.estimate_hitting_time(config, 20, trials=20, cap=2000, seed=2)
        self.assertEqual(estimate.censored, 20)
        self.assertIsNone(estimate.mean)
        self.assertEqual(estimate.censored_mean, 2000)
        self.assertGreaterEqual(estimate.censored_mean, BoundsService.ell_star_bound(config))
        data = HittingEstimateSerializer(estimate).data
        self.assertEqual(data['censored'], 20)
        self.assertIsNone(data['std_error'])

    def test_ell_star_hitting_below_upper_bound(self):
        config = threshold_config(n=50, tau=50, alpha=0.1, beta=1.0)
        target = math.ceil(BirthDeathService.ell_star(config))
        estimate = SimulationService.estimate_hitting_time(config, target, trials=200, seed=5)
        self.assertEqual(estimate.successes, 200)
        self.assertLessEqual(estimate.mean, BoundsService.hitting_upper_bound_ell_star(config))

    def test_invalid_target(self):
        with self.assertRaises(InvalidConfigError):
            SimulationService.estimate_hitting_time(threshold_config(n=4, tau=2), 5, trials=3)

    @tag('slow')
    def test_matches_exact_hitting_far_target(self):
        reference = threshold_config(n=30, tau=30, alpha=1.0, beta=1.0)
        tau = math.ceil(BirthDeathService.ell_star(reference)) + 10
        config = threshold_config(n=30, tau=tau, alpha=1.0, beta=1.0)
        exact = BirthDeathService.expected_hitting_exact(config, 0, tau).value
        estimate = SimulationService.estimate_hitting_time(config, tau, trials=200, seed=30)
        self.assertEqual(estimate.successes, 200)
        self.assertLess(abs(estimate.mean - exact), 3 * estimate.std_error)


class OccupancyTests(SimpleTestCase):

    def test_post_hit_occupancy(self):
        trajectory = TrajectoryRecord(
            seed=0, trial=0, stride=1, steps=range(6),
            ells=[0, 1, 3, 2, 3, 3], values=[0] * 6, potentials=[0] * 6,
        )
        self.assertAlmostEqual(SimulationService.post_hit_occupancy(trajectory, 3), 0.75)
        self.assertIsNone(SimulationService.post_hit_occupancy(trajectory, 4))

    def test_steps_must_increase(self):
        with self.assertRaises(ValueError):
            TrajectoryRecord(seed=0, trial=0, stride=1, steps=[0, 2, 2], ells=[0, 0, 0],
                             values=[0, 0, 0], potentials=[0, 0, 0])


class EmpiricalDistributionTests(SimpleTestCase):

    def test_and_game_high_mass(self):
        distribution = SimulationService.empirical_distribution(and_game(), steps=200_000, burn_in=1000, seed=6)
        expected = math.exp(2) / (1 + 2 * math.exp(-1) + math.exp(2))
        self.assertAlmostEqual(distribution.mass_at_least(2), expected, delta=0.01)

    def test_heterogeneous_costs_use_gibbs_reference(self):
        config = threshold_config(n=6, tau=3, v_high=30.0, costs=[0.3, 0.6, 0.9, 1.2, 1.5, 1.8])
        distribution = SimulationService.empirical_distribution(config, steps=300_000, burn_in=1000, seed=8)
        np.testing.assert_allclose(distribution.stationary, BirthDeathService.full_gibbs_lumped(config))
        self.assertLessEqual(distribution.tv_distance, 0.02)

    def test_requires_binary_anonymous_game(self):
        with self.assertRaises(UnsupportedCombinationError):
            SimulationService.empirical_distribution(graded_config(), steps=10, burn_in=0, seed=1)

    @tag('slow')
    def test_converges_to_stationary_law(self):
        uniform = SimulationService.empirical_distribution(
            threshold_config(n=8, tau=4, beta=0.0), steps=1_000_000, burn_in=1000, seed=12,
        )
        self.assertLessEqual(uniform.tv_distance, 0.01)
        tilted = SimulationService.empirical_distribution(
            threshold_config(n=8, tau=4, v_high=30.0, beta=1.0), steps=1_000_000, burn_in=1000, seed=13,
        )
        self.assertLessEqual(tilted.tv_distance, 0.02)


class SweepTests(SimpleTestCase):

    @tag('slow')
    def test_hitting_time_increases_with_cost(self):
        config = threshold_config(n=50, tau=25, alpha=0.05, beta=3.0)
        rows = SimulationService.alpha_sweep(config, [0.05, 0.1, 0.2], target=25, trials=100, seed=1)
        means = [row.mean_hitting for row in rows]
        self.assertTrue(means[0] < means[1] < means[2])
        exact = [row.exact_hitting for row in rows]
        self.assertTrue(exact[0] < exact[1] < exact[2])

    @tag('slow')
    def test_larger_airdrop_keeps_level_above_threshold(self):
        config = threshold_config(n=50, tau=25, v_high=500.0, alpha=0.1, beta=1.0)
        rows = SimulationService.rho_sweep(config, [0.275, 0.5], steps=20_000, trials=4, seed=2)
        self.assertTrue(all(row.successes == 4 for row in rows))
        self.assertLess(rows[0].occupancy, rows[1].occupancy)
        self.assertLess(rows[0].p_high, rows[1].p_high)
        data = SweepResultSerializer(rows, many=True).data
        self.assertEqual([row['parameter'] for row in data], ['rho', 'rho'])

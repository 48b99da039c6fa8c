# chains/tests.py
# Tests de la chaîne agrégée : loi stationnaire, temps d'atteinte, bornes

import math

import numpy as np
from django.test import SimpleTestCase
from scipy.special import comb, logsumexp
from scipy.stats import binom

from common.exceptions import ResourceLimitError, UnsupportedCombinationError
from games.domain import GameConfig
from .serializers import HittingLowerBoundSerializer, StationaryLawSerializer
from .services.birth_death_service import BirthDeathService
from .services.bounds_service import BoundsService


def threshold_config(n=10, tau=5, v_low=0.0, v_high=100.0, alpha=1.0, rho=0.5, beta=1.0):
    return GameConfig.build(
        n=n, costs=alpha, rho=rho, t_tot=10.0, beta=beta,
        technology={'kind': 'threshold', 'params': {'tau': tau, 'v_low': v_low, 'v_high': v_high}},
    )


def linear_config(n=20, lambda_v=2.0, alpha=1.0, rho=0.5, beta=1.0):
    return GameConfig.build(n=n, costs=alpha, rho=rho, t_tot=1.0, beta=beta,
                            technology={'kind': 'linear', 'params': {'lambda_v': lambda_v}})


def and_game(rho=1.0, alpha=1.0, v_high=8.0):
    return GameConfig.build(n=2, costs=alpha, rho=rho, t_tot=1.0, beta=1.0,
                            technology={'kind': 'table', 'params': {'values': [0.0, 0.0, v_high]}})


class BirthDeathChainTests(SimpleTestCase):

    def test_boundary_and_probability_constraints(self):
        chain = BirthDeathService.build_chain(threshold_config(n=12, tau=6, beta=2.0))
        self.assertEqual(chain.up[-1], 0.0)
        self.assertEqual(chain.down[0], 0.0)
        self.assertTrue(np.all(chain.up + chain.down <= 1.0 + 1e-15))
        self.assertTrue(np.all(chain.hold >= 0.0))
        np.testing.assert_allclose(chain.kernel().sum(axis=1), 1.0, rtol=0, atol=1e-14)

    def test_stationary_law_is_invariant_under_lumped_kernel(self):
        config = threshold_config(n=12, tau=6, beta=1.5, rho=0.8)
        law = BirthDeathService.stationary(config).probs
        np.testing.assert_allclose(law @ BirthDeathService.lumped_kernel(config), law, atol=1e-13)

    def test_uniform_response_at_zero_beta(self):
        n = 9
        chain = BirthDeathService.build_chain(threshold_config(n=n, beta=0.0))
        levels = np.arange(n + 1)
        np.testing.assert_allclose(chain.up, (n - levels) / (2 * n), atol=1e-15)
        np.testing.assert_allclose(chain.down, levels / (2 * n), atol=1e-15)

    def test_threshold_up_probability_off_boundary(self):
        config = threshold_config(n=10, tau=5, alpha=1.0, beta=1.5)
        chain = BirthDeathService.build_chain(config)
        p_ab = 1.0 / (1.0 + math.exp(1.5))
        for ell in (0, 1, 2, 3, 5, 7, 9):
            self.assertAlmostEqual(chain.up[ell], (10 - ell) / 10 * p_ab, places=14)
        boundary = 1.0 / (1.0 + math.exp((1.0 - 0.5 * 100.0 / 10) * 1.5))
        self.assertAlmostEqual(chain.up[4], 6 / 10 * boundary, places=14)

    def test_detailed_balance_reconstruction(self):
        config = threshold_config(n=8, tau=4, v_high=20.0, beta=1.3)
        chain = BirthDeathService.build_chain(config)
        rebuilt = np.ones(9)
        for ell in range(8):
            rebuilt[ell + 1] = rebuilt[ell] * chain.up[ell] / chain.down[ell + 1]
        rebuilt /= rebuilt.sum()
        np.testing.assert_allclose(rebuilt, chain.probs, rtol=1e-10)

    def test_lumpable_requirements(self):
        heterogeneous = GameConfig.build(
            n=3, costs=[1.0, 2.0, 1.0], rho=0.5, t_tot=1.0, beta=1.0,
            technology={'kind': 'threshold', 'params': {'tau': 2, 'v_high': 10.0}},
        )
        with self.assertRaises(UnsupportedCombinationError):
            BirthDeathService.build_chain(heterogeneous)
        general = GameConfig.build(
            n=1, costs=1.0, rho=0.5, t_tot=1.0, beta=1.0,
            technology={'kind': 'general', 'params': {'values': {(0.0,): 0.0, (1.0,): 1.0}}},
        )
        with self.assertRaises(UnsupportedCombinationError) as ctx:
            BirthDeathService.stationary(general)
        self.assertEqual(ctx.exception.exit_code, 5)


class StationaryLawTests(SimpleTestCase):

    def test_zero_beta_is_binomial(self):
        n = 12
        law = BirthDeathService.stationary(threshold_config(n=n, tau=6, beta=0.0))
        expected = comb(n, np.arange(n + 1)) / 2 ** n
        np.testing.assert_allclose(law.probs, expected, rtol=1e-12)
        self.assertAlmostEqual(law.mean_level, n / 2, places=10)

    def test_and_game_weights(self):
        law = BirthDeathService.stationary(and_game())
        weights = np.array([1.0, 2 * math.exp(-1), math.exp(2)])
        np.testing.assert_allclose(law.probs, weights / weights.sum(), rtol=1e-12)

    def test_linear_partition_and_binomial(self):
        for n in (10, 100, 1000):
            config = linear_config(n=n, lambda_v=3.0, alpha=0.2, rho=0.4, beta=0.7)
            law = BirthDeathService.stationary(config)
            log_z = logsumexp(law.log_weights)
            self.assertLess(abs(log_z - BirthDeathService.linear_log_partition(config)) / log_z, 1e-12)
            p = BirthDeathService.linear_ell_star(config) / n
            np.testing.assert_allclose(law.probs, binom.pmf(np.arange(n + 1), n, p), rtol=1e-9, atol=1e-14)
            self.assertAlmostEqual(law.mean_level, n * p, delta=1e-9 * n)

    def test_full_gibbs_lumps_exactly(self):
        for beta in (0.0, 0.8, 2.0):
            config = threshold_config(n=8, tau=4, v_high=20.0, beta=beta)
            np.testing.assert_allclose(
                BirthDeathService.full_gibbs_lumped(config), BirthDeathService.stationary(config).probs,
                rtol=0, atol=1e-10,
            )

    def test_scale_stability(self):
        config = threshold_config(n=10_000, tau=6_000, v_high=1e6, alpha=1.0, beta=1.0, rho=0.3)
        law = BirthDeathService.stationary(config)
        self.assertTrue(np.all(np.isfinite(law.log_probs)))
        self.assertAlmostEqual(math.fsum(law.probs), 1.0, places=12)
        self.assertTrue(0.0 <= law.p_high <= 1.0)

    def test_serialized_rows(self):
        data = StationaryLawSerializer(BirthDeathService.stationary(and_game())).data
        self.assertEqual([row['ell'] for row in data['rows']], [0, 1, 2])
        self.assertAlmostEqual(sum(row['prob'] for row in data['rows']), 1.0, places=12)


class SuccessProbabilityTests(SimpleTestCase):

    def test_two_player_instance(self):
        success = BirthDeathService.success_probability(threshold_config(n=2, tau=2, v_high=8.0, rho=1.0))
        self.assertAlmostEqual(success.c, (1 + 2 * math.exp(-1)) / math.exp(-2), places=10)
        self.assertAlmostEqual(success.b, 4.0)
        expected = math.exp(2) / (1 + 2 * math.exp(-1) + math.exp(2))
        self.assertAlmostEqual(success.p_high, expected, places=12)
        self.assertAlmostEqual(round(success.p_high, 4), 0.8098)

    def test_closed_form_matches_summation(self):
        cases = [
            threshold_config(n=2, tau=2, v_high=8.0),
            threshold_config(n=10, tau=5, v_high=30.0, alpha=0.5),
            threshold_config(n=100, tau=50, v_high=200.0, alpha=0.1),
        ]
        for config in cases:
            for rho in np.linspace(0.0, 1.0, 100):
                shifted = config.with_rho(float(rho))
                closed = BirthDeathService.success_probability(shifted).p_high
                summed = BirthDeathService.stationary(shifted).p_high
                self.assertLess(abs(closed - summed) / summed, 1e-12)

    def test_zero_rho_and_monotonicity(self):
        success = BirthDeathService.success_probability(threshold_config(rho=0.0))
        self.assertAlmostEqual(success.p_high, 1.0 / (1.0 + success.c), places=14)
        self.assertAlmostEqual(success.p_high_at_zero, success.p_high, places=14)
        curve = success.at(np.linspace(0.0, 1.0, 100))
        self.assertTrue(np.all(np.diff(curve) > 0))

    def test_c_independent_of_rewards(self):
        a = BirthDeathService.success_probability(threshold_config(v_low=0.0, v_high=50.0, rho=0.1))
        b = BirthDeathService.success_probability(threshold_config(v_low=10.0, v_high=500.0, rho=0.9))
        self.assertAlmostEqual(a.log_c, b.log_c, places=12)

    def test_zero_beta(self):
        success = BirthDeathService.success_probability(threshold_config(n=10, tau=5, beta=0.0))
        expected = sum(math.comb(10, ell) for ell in range(5, 11)) / 2 ** 10
        self.assertAlmostEqual(success.p_high, expected, places=12)
        self.assertEqual(success.b, 0.0)


class HittingTimeTests(SimpleTestCase):

    def test_exact_sum_matches_first_step_oracle(self):
        for n, beta, tau in ((5, 1.0, 3), (20, 0.7, 12), (40, 1.5, 25), (64, 1.0, 40)):
            config = threshold_config(n=n, tau=tau, v_high=3.0 * n, alpha=0.8, beta=beta)
            for start, target in ((0, tau), (1, tau - 1), (0, min(tau + 3, n))):
                exact = BirthDeathService.expected_hitting_exact(config, start, target)
                oracle = BirthDeathService.first_step_hitting(config, start, target)
                self.assertTrue(exact.finite)
                self.assertLess(abs(exact.value - oracle) / oracle, 1e-8)

    def test_trivial_and_degenerate_paths(self):
        config = threshold_config()
        self.assertEqual(BirthDeathService.expected_hitting_exact(config, 0, 0).value, 0.0)
        frozen = threshold_config(beta=1000.0, rho=0.0)
        result = BirthDeathService.expected_hitting_exact(frozen, 0, 5)
        self.assertFalse(result.finite)
        self.assertEqual(result.value, math.inf)

    def test_upper_bound_for_ell_star(self):
        config = threshold_config(n=50, tau=40, alpha=0.1, beta=1.0, v_high=100.0)
        ell_star = BirthDeathService.ell_star(config)
        exact = BirthDeathService.expected_hitting_exact(config, 0, math.ceil(ell_star))
        self.assertLessEqual(exact.value, BoundsService.hitting_upper_bound_ell_star(config))

    def test_exact_dominates_lower_bounds(self):
        n = 30
        for alpha_beta in (1.0, 2.0):
            reference = threshold_config(n=n, tau=15, alpha=alpha_beta, beta=1.0)
            ell_star = BirthDeathService.ell_star(reference)
            tau = math.ceil(ell_star) + 10
            config = threshold_config(n=n, tau=tau, alpha=alpha_beta, beta=1.0, v_high=100.0)
            exact = BirthDeathService.expected_hitting_exact(config, 0, tau)
            bound = BoundsService.hitting_lower_bound(config, (math.ceil(ell_star), tau - 1), tau)
            self.assertIsNotNone(bound.threshold_form)
            self.assertIsNotNone(bound.ell_star_form)
            self.assertGreaterEqual(exact.value, bound.best)
            self.assertGreaterEqual(bound.drift_form, bound.steep_form * (1 - 1e-12))
            upper = BirthDeathService.expected_hitting_exact(config, 0, math.ceil(ell_star))
            self.assertLessEqual(upper.value, BoundsService.hitting_upper_bound_ell_star(config))

    def test_hitting_time_increases_with_cost(self):
        values = []
        for alpha in (0.05, 0.1, 0.2):
            config = threshold_config(n=50, tau=25, alpha=alpha, beta=3.0, v_high=100.0)
            values.append(BirthDeathService.expected_hitting_exact(config, 0, 25).value)
        self.assertTrue(values[0] < values[1] < values[2])


class DriftTests(SimpleTestCase):

    def test_ell_star_values(self):
        self.assertAlmostEqual(BirthDeathService.ell_star(threshold_config(n=10, alpha=1.0, beta=1.0)), 10 / (1 + math.e), places=12)
        self.assertAlmostEqual(BirthDeathService.ell_star(threshold_config(n=10, beta=0.0)), 5.0)
        self.assertAlmostEqual(BirthDeathService.ell_star(threshold_config(n=100, tau=50, alpha=0.1, beta=1.0)), 47.50, places=2)

    def test_zero_beta_drift(self):
        config = threshold_config(n=10, beta=0.0)
        for ell in range(10):
            self.assertAlmostEqual(BirthDeathService.drift(config, ell), (10 - ell) / (ell + 1), places=12)

    def test_flat_region_and_threshold_jump(self):
        config = threshold_config(n=10, tau=5, alpha=1.0, beta=1.2, rho=0.5, v_high=40.0)
        flat = lambda ell: (10 - ell) / (ell + 1) * math.exp(-1.2)
        self.assertAlmostEqual(BirthDeathService.drift(config, 2), flat(2), places=12)
        self.assertAlmostEqual(
            BirthDeathService.drift(config, 4) / flat(4), math.exp(1.2 * 0.5 / 10 * 40.0), places=10,
        )

    def test_log_drift_sign_flips_around_ell_star(self):
        config = threshold_config(n=40, tau=40, alpha=1.0, beta=1.0)
        ell_star = BirthDeathService.ell_star(config)
        self.assertGreater(BirthDeathService.log_drift(config, math.floor(ell_star) - 1), 0)
        self.assertLess(BirthDeathService.log_drift(config, math.ceil(ell_star) + 1), 0)


class BoundTests(SimpleTestCase):

    def test_threshold_bound_examples(self):
        config = threshold_config(n=10, tau=5, alpha=1.0, beta=1.0)
        self.assertAlmostEqual(BoundsService.threshold_stated_bound(config, 2), (math.e * 3 / 8) ** 3, places=12)
        self.assertAlmostEqual(BoundsService.threshold_stated_bound(config, 2), 1.059, places=3)
        self.assertAlmostEqual(BoundsService.threshold_bound(config, 2), (math.e * 3 / 8) ** 2, places=12)
        self.assertEqual(BoundsService.threshold_bound(config, 4), 1.0)
        self.assertAlmostEqual(BoundsService.ell_star_bound(config), 1.51, places=2)

    def test_stated_threshold_form_can_exceed_exact(self):
        config = threshold_config(n=5, tau=2, alpha=5.0, beta=1.0, rho=1.0, v_high=100.0)
        exact = BirthDeathService.expected_hitting_exact(config, 0, 2).value
        bound = BoundsService.hitting_lower_bound(config, (0, 2), 2)
        self.assertGreater(bound.threshold_stated_form, exact)
        self.assertAlmostEqual(bound.threshold_form, math.exp(5) / 5, places=9)
        self.assertLessEqual(bound.best, exact)

    def test_exact_dominates_best_over_grid(self):
        rng = np.random.default_rng(17)
        for _ in range(120):
            n = int(rng.integers(2, 13))
            tau = int(rng.integers(1, n + 1))
            config = threshold_config(
                n=n, tau=tau, alpha=float(rng.choice([0.3, 1.0, 2.0, 5.0])), beta=1.0,
                rho=float(rng.uniform(0.05, 1.0)), v_high=float(rng.choice([10.0, 100.0])),
            )
            exact = BirthDeathService.expected_hitting_exact(config, 0, tau)
            if not exact.finite:
                continue
            for low in range(tau):
                bound = BoundsService.hitting_lower_bound(config, (low, tau), tau)
                self.assertLessEqual(bound.best, exact.value * (1 + 1e-9), (n, tau, low, config.costs[0], config.rho))

    def test_linear_bound_formula(self):
        config = linear_config(n=20, lambda_v=2.0, alpha=1.0, rho=0.5, beta=1.0)
        gamma = 0.5 / 20 * 2.0 - 1.0
        expected = (math.exp(-gamma) * 4 / 17) ** (12 - 3 - 1)
        self.assertAlmostEqual(BoundsService.linear_bound(config, 3, 12), expected, places=8)
        bound = BoundsService.hitting_lower_bound(config, (3, 8), 12)
        self.assertAlmostEqual(bound.linear_form, expected, places=8)
        self.assertIsNone(bound.threshold_form)
        exact = BirthDeathService.expected_hitting_exact(config, 0, 12)
        self.assertGreaterEqual(exact.value, bound.best)

    def test_mixing_lower_bound_forms(self):
        config = threshold_config(n=10, tau=5, alpha=1.0, beta=1.0, rho=1.0, v_high=100.0)
        with self.assertLogs('airdrop_lab', level='WARNING'):
            bound = BoundsService.mixing_lower_bound_threshold(config)
        self.assertTrue(bound.applicable)
        self.assertAlmostEqual(bound.derived_form, math.exp(4) / 210, places=12)
        self.assertAlmostEqual(bound.reduced_form, math.exp(5) / 210, places=12)
        steep = threshold_config(n=10, tau=5, alpha=3.0, beta=1.0, rho=1.0, v_high=1000.0)
        self.assertAlmostEqual(BoundsService.mixing_lower_bound_threshold(steep).derived_form, 775.0, delta=0.1)

    def test_mixing_lower_bound_not_applicable(self):
        bound = BoundsService.mixing_lower_bound_threshold(threshold_config(rho=0.0))
        self.assertFalse(bound.applicable)
        self.assertIsNone(bound.derived_form)

    def test_serialized_bound(self):
        config = threshold_config(n=10, tau=5, alpha=1.0, beta=1.0)
        data = HittingLowerBoundSerializer(BoundsService.hitting_lower_bound(config, (2, 4), 5)).data
        self.assertEqual(data['interval'], [2, 4])
        self.assertIsNone(data['linear_form'])
        self.assertGreaterEqual(data['best'], data['threshold_form'])


class MixingTests(SimpleTestCase):

    def test_exact_mixing_inside_cutoff_bracket(self):
        for n in (4, 8):
            for beta in (0.0, 0.5, 1.0):
                config = threshold_config(n=n, tau=n // 2, v_high=10.0, alpha=1.0, beta=beta)
                report = BirthDeathService.t_cutoff(config)
                t_mix = BirthDeathService.exact_mixing_time(config)
                self.assertLessEqual(report.mix_lower, t_mix)
                self.assertLessEqual(t_mix, report.mix_upper)
                self.assertEqual(report.mix_upper, 288 * report.t_cutoff)

    def test_ell0_is_smallest_median_state(self):
        config = threshold_config(n=10, tau=5, beta=0.0)
        report = BirthDeathService.t_cutoff(config)
        cumulative = np.cumsum(BirthDeathService.stationary(config).probs)
        self.assertEqual(report.ell0, int(np.argmax(cumulative >= 0.5)))
        self.assertEqual(report.ell0, 5)

    def test_cutoff_dominates_mixing_lower_bound(self):
        config = threshold_config(n=10, tau=5, alpha=2.0, beta=1.0, rho=1.0, v_high=500.0)
        bound = BoundsService.mixing_lower_bound_threshold(config)
        self.assertTrue(bound.applicable)
        self.assertGreaterEqual(BirthDeathService.t_cutoff(config).t_cutoff, bound.derived_form)

    def test_mixing_step_cap(self):
        config = threshold_config(n=8, tau=4, alpha=2.0, beta=2.0)
        with self.assertRaises(ResourceLimitError) as ctx:
            BirthDeathService.exact_mixing_time(config, max_steps=2)
        self.assertEqual(ctx.exception.exit_code, 6)

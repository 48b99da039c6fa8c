# designer/tests.py
# Tests du profit espéré et du choix de ρ* à β fini

import math

import numpy as np
from django.test import SimpleTestCase

from chains.services.birth_death_service import BirthDeathService
from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from games.domain import GameConfig
from .serializers import OptimalAirdropSerializer, ProfitCurveSerializer
from .services.profit_service import ProfitService


def threshold_config(n=10, tau=5, v_low=0.0, v_high=100.0, alpha=1.0, rho=0.5, beta=1.0, d_v=0.0):
    return GameConfig.build(
        n=n, costs=alpha, rho=rho, t_tot=10.0, beta=beta, d_v=d_v,
        technology={'kind': 'threshold', 'params': {'tau': tau, 'v_low': v_low, 'v_high': v_high}},
    )


def and_game():
    return GameConfig.build(n=2, costs=1.0, rho=1.0, t_tot=1.0, beta=1.0,
                            technology={'kind': 'table', 'params': {'values': [0.0, 0.0, 8.0]}})


class ProfitCurveTests(SimpleTestCase):

    def test_and_game_value(self):
        curve = ProfitService.profit_curve(and_game(), [1.0])
        expected = 8 * math.exp(2) / (math.exp(2) + 2 * math.exp(-1) + 1)
        self.assertAlmostEqual(curve.points[0].value, expected, places=10)
        self.assertAlmostEqual(round(expected, 3), 6.478)
        self.assertAlmostEqual(ProfitService.and_game_expected_value(1.0, 1.0, 1.0, 8.0), expected, places=10)
        self.assertEqual(curve.points[0].profit, 0.0)
        self.assertFalse(curve.closed_form)

    def test_and_game_closed_form_on_grid(self):
        for rho in np.linspace(0, 1, 11):
            self.assertAlmostEqual(
                ProfitService.and_game_expected_value(1.0, 1.0, rho, 8.0),
                ProfitService.expected_value(and_game(), rho), places=10,
            )

    def test_closed_form_matches_summation(self):
        for config in (threshold_config(), threshold_config(n=100, tau=30, v_high=1000.0, beta=1.13)):
            curve = ProfitService.profit_curve(config, np.linspace(0, 1, 101))
            self.assertTrue(curve.closed_form)
            self.assertLessEqual(curve.max_relative_gap, 1e-10)
            for point in curve.points:
                self.assertAlmostEqual(point.profit, (1 - point.rho) * point.value - curve.d_v, delta=1e-12 * max(1.0, point.value))
            p_high = [point.p_high for point in curve.points]
            self.assertTrue(all(b > a for a, b in zip(p_high, p_high[1:])))

    def test_zero_rho_profit(self):
        config = threshold_config(d_v=5.0)
        curve = ProfitService.profit_curve(config, [0.0, 0.5])
        c = BirthDeathService.success_probability(config).c
        self.assertAlmostEqual(curve.points[0].profit, 100.0 / (1 + c) - 5.0, places=10)

    def test_bad_project(self):
        curve = ProfitService.profit_curve(threshold_config(d_v=150.0), np.linspace(0, 1, 50))
        self.assertTrue(all(point.profit < 0 for point in curve.points))

    def test_rejects_empty_grid_and_zero_beta(self):
        with self.assertRaises(InvalidConfigError) as ctx:
            ProfitService.profit_curve(threshold_config(), [])
        self.assertEqual(ctx.exception.field, 'experiment.rho_grid')
        with self.assertRaises(InvalidConfigError):
            ProfitService.profit_curve(threshold_config(beta=0.0), [0.5])
        with self.assertRaises(InvalidConfigError):
            ProfitService.profit_curve(threshold_config(), [1.5])

    def test_serialization(self):
        data = ProfitCurveSerializer(ProfitService.profit_curve(threshold_config(), [0.0, 0.5, 1.0])).data
        self.assertEqual([p['rho'] for p in data['points']], [0.0, 0.5, 1.0])
        self.assertTrue(data['closed_form'])


class OptimalRhoTests(SimpleTestCase):

    def test_rho_bar_example(self):
        config = threshold_config(n=100, tau=30, v_high=1000.0, beta=1.13)
        optimum = ProfitService.optimal_rho(config)
        self.assertAlmostEqual(optimum.b, 11.3, places=12)
        self.assertAlmostEqual(optimum.rho_bar, 1 - 1 / 11.3, places=12)
        self.assertAlmostEqual(optimum.rho_bar, 0.9115, places=4)
        self.assertGreater(optimum.rho_star, 0.0)
        self.assertLessEqual(optimum.rho_star, optimum.rho_bar)
        self.assertGreaterEqual(optimum.profit_star, optimum.grid_best_profit - 1e-9)
        self.assertLessEqual(optimum.p_high_star, optimum.p_high_bar)
        self.assertAlmostEqual(optimum.p_high_bar, 1 / (1 + optimum.c * math.exp(1 - optimum.b)), places=12)

    def test_no_airdrop_case(self):
        config = threshold_config(n=100, tau=30, v_high=50.0, beta=1.13, d_v=3.0)
        optimum = ProfitService.optimal_rho(config)
        self.assertEqual(optimum.rho_star, 0.0)
        self.assertEqual(optimum.regime, 'no-airdrop')
        self.assertEqual(optimum.profit_star, 50.0 * optimum.p_high_zero - 3.0)
        self.assertIsNone(optimum.rho_bar)

    def test_positive_airdrop_has_positive_slope(self):
        config = threshold_config()
        optimum = ProfitService.optimal_rho(config)
        self.assertEqual(optimum.regime, 'positive-airdrop')
        self.assertGreater(optimum.rho_star, 0.0)
        self.assertGreater(optimum.derivative_at_zero, 0.0)
        h = 1e-6
        forward = (ProfitService.expected_value(config, h) * (1 - h) - ProfitService.expected_value(config, 0.0)) / h
        self.assertGreater(forward, 0.0)

    def test_derivative_negative_beyond_rho_bar(self):
        config = threshold_config()
        optimum = ProfitService.optimal_rho(config)
        for rho in np.linspace(optimum.rho_bar + 0.01, 1.0, 20):
            self.assertLess(ProfitService.profit_derivative(rho, optimum.b, optimum.c, 100.0), 0.0)
            ahead = min(rho + 1e-5, 1.0)
            if ahead > rho:
                difference = ProfitService.expected_value(config, ahead) * (1 - ahead) - ProfitService.expected_value(config, rho) * (1 - rho)
                self.assertLess(difference, 0.0)

    def test_derivative_matches_finite_difference(self):
        b, c, v_high = 10.0, 8.0, 100.0

        def profit(rho):
            return v_high * (1 - rho) / (1 + c * math.exp(-b * rho))

        for rho in (0.0, 0.2, 0.5, 0.9):
            h = 1e-6
            numeric = (profit(rho + h) - profit(rho - h)) / (2 * h)
            self.assertAlmostEqual(ProfitService.profit_derivative(rho, b, c, v_high), numeric, delta=1e-4)

    def test_beats_dense_grid(self):
        for beta in (0.5, 1.13, 3.0):
            config = threshold_config(n=20, tau=8, v_high=200.0, alpha=0.7, beta=beta, d_v=10.0)
            optimum = ProfitService.optimal_rho(config)
            grid = np.linspace(0, 1, 10_000)
            curve = ProfitService.profit_curve(config, grid[::97])
            self.assertGreaterEqual(optimum.profit_star, curve.profit_star - 1e-9)
            self.assertGreaterEqual(optimum.profit_star, optimum.grid_best_profit - 1e-9)

    def test_nonzero_low_value_falls_back_to_grid(self):
        optimum = ProfitService.optimal_rho(threshold_config(v_low=10.0, v_high=100.0))
        self.assertFalse(optimum.closed_form_applies)
        self.assertEqual(optimum.regime, 'grid-search')
        self.assertEqual(optimum.rho_star, optimum.grid_best_rho)

    def test_converges_to_critical_rho(self):
        distances = []
        for beta in (1.0, 5.0, 20.0, 100.0):
            optimum = ProfitService.optimal_rho(threshold_config(beta=beta))
            distances.append(abs(optimum.rho_star - 0.5))
        self.assertTrue(all(b <= a for a, b in zip(distances, distances[1:])))
        self.assertLess(distances[-1], 0.01)

    def test_requires_threshold(self):
        with self.assertRaises(UnsupportedCombinationError):
            ProfitService.optimal_rho(and_game())

    def test_serialization(self):
        data = OptimalAirdropSerializer(ProfitService.optimal_rho(threshold_config())).data
        self.assertEqual(data['regime'], 'positive-airdrop')
        self.assertTrue(data['closed_form_applies'])


class VanishingNoiseTests(SimpleTestCase):

    def test_delegates_to_threshold_regime(self):
        regime = ProfitService.vanishing_noise_profit(threshold_config(n=10, tau=5, v_high=100.0, alpha=1.0))
        self.assertEqual(regime.regime, 'airdrop-optimal')
        self.assertAlmostEqual(regime.rho_c, 0.5)
        self.assertEqual(regime.epsilon, 1e-3)
        self.assertAlmostEqual(regime.guaranteed_profit, (1 - 0.501) * 100.0)

    def test_forced_regime(self):
        regime = ProfitService.vanishing_noise_profit(threshold_config(alpha=3.0))
        self.assertEqual(regime.regime, 'no-airdrop-forced')
        self.assertEqual(regime.recommended_rho, 0.0)

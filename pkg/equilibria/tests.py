# equilibria/tests.py
# Tests des équilibres de Nash purs, du potentiel maximal et des régimes fermés

import itertools
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import InvalidConfigError, ResourceLimitError, UnsupportedCombinationError
from games.domain import GameConfig
from games.technologies import TechnologySpec
from .serializers import EquilibriumReportSerializer
from .services.designer_regime_service import DesignerRegimeService
from .services.equilibrium_service import EquilibriumService


def threshold_config(n=10, tau=5, v_low=0.0, v_high=100.0, alpha=1.0, rho=1.0, beta=1.0, d_v=0.0):
    return GameConfig.build(
        n=n, costs=alpha, rho=rho, t_tot=10.0, beta=beta, d_v=d_v,
        technology={'kind': 'threshold', 'params': {'tau': tau, 'v_low': v_low, 'v_high': v_high}},
    )


def and_game(rho=1.0, alpha=1.0, v_high=8.0):
    return GameConfig.build(n=2, costs=alpha, rho=rho, t_tot=1.0, beta=1.0,
                            technology={'kind': 'table', 'params': {'values': [0.0, 0.0, v_high]}})


def level_profile(n, ell):
    return tuple([1.0] * ell + [0.0] * (n - ell))


class NashCheckTests(SimpleTestCase):

    def test_example_one_levels(self):
        config = threshold_config()
        self.assertTrue(EquilibriumService.is_pure_nash(config, level_profile(10, 5)))
        check = EquilibriumService.is_pure_nash(config, level_profile(10, 4))
        self.assertFalse(check)
        self.assertEqual(check.deviation.to_action, 0.0)
        self.assertTrue(EquilibriumService.is_pure_nash(config, level_profile(10, 0)))

    def test_and_game_half_profile(self):
        check = EquilibriumService.is_pure_nash(and_game(), (1.0, 0.0))
        self.assertFalse(check)
        self.assertEqual(check.deviation.player, 0)
        self.assertAlmostEqual(check.deviation.gain, 1.0)

    def test_equilibrium_conditions_match_deviation_test(self):
        rng = np.random.default_rng(5)
        for _ in range(150):
            n = int(rng.integers(1, 4))
            grid = sorted({round(float(x), 2) for x in rng.uniform(0, 2, 3)})
            config = GameConfig.build(
                n=n, costs=[float(c) for c in rng.uniform(0.1, 2, n)], rho=float(rng.uniform(0, 1)),
                t_tot=1, beta=1, actions=grid,
                technology={'kind': 'quadratic', 'params': {'tau': float(rng.uniform(0.2, 2))}},
            )
            for profile in itertools.product(*config.actions):
                self.assertEqual(
                    EquilibriumService.is_pure_nash(config, profile).is_equilibrium,
                    EquilibriumService.equilibrium_conditions(config, profile).is_equilibrium,
                )


class EnumerationTests(SimpleTestCase):

    def test_example_one_equilibrium_levels(self):
        report = EquilibriumService.enumerate_pne(threshold_config())
        self.assertEqual(report.method, 'anonymous')
        self.assertEqual(report.equilibrium_levels(), [0, 5])
        self.assertEqual(report.level_counts(), {0: 1, 5: math.comb(10, 5)})

    def test_and_game_equilibria(self):
        report = EquilibriumService.enumerate_pne(and_game(), method='brute-force')
        self.assertEqual(report.pne, ((0.0, 0.0), (1.0, 1.0)))

    def test_linear_low_reward_only_zero(self):
        config = GameConfig.build(n=6, costs=1.0, rho=0.5, t_tot=1, beta=1,
                                  technology={'kind': 'linear', 'params': {'lambda_v': 2.0}})
        report = EquilibriumService.enumerate_pne(config, method='brute-force')
        self.assertEqual(report.pne, ((0.0,) * 6,))

    def test_resource_cap(self):
        config = GameConfig.build(n=30, costs=1.0, rho=0.5, t_tot=1, beta=1,
                                  technology={'kind': 'linear', 'params': {'lambda_v': 2.0}})
        with self.assertRaises(ResourceLimitError):
            EquilibriumService.enumerate_pne(config, method='brute-force')

    def test_fast_path_requires_binary_anonymous(self):
        config = GameConfig.build(n=2, costs=1.0, rho=0.5, t_tot=1, beta=1, actions=[0.0, 0.5, 1.0],
                                  technology={'kind': 'linear', 'params': {'lambda_v': 2.0}})
        with self.assertRaises(UnsupportedCombinationError):
            EquilibriumService.enumerate_pne(config, method='anonymous')
        self.assertEqual(EquilibriumService.enumerate_pne(config).method, 'brute-force')

    def test_fast_path_matches_brute_force(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(1, 13))
            kind = rng.choice(['threshold', 'linear', 'quadratic', 'table', 'concave'])
            if kind == 'threshold':
                spec = TechnologySpec('threshold', {'tau': int(rng.integers(1, n + 1)), 'v_low': float(rng.uniform(0, 3)),
                                                    'v_high': float(rng.uniform(5, 60))})
            elif kind == 'linear':
                spec = TechnologySpec('linear', {'lambda_v': float(rng.uniform(0.5, 10))})
            elif kind == 'quadratic':
                spec = TechnologySpec('quadratic', {'tau': float(rng.uniform(0.5, 5))})
            elif kind == 'concave':
                spec = TechnologySpec('concave', {'tau': float(rng.uniform(0.2, 2)), 'c': float(rng.uniform(0.2, 0.9))})
            else:
                steps = rng.uniform(0, 10, n + 1) * (rng.random(n + 1) < 0.5)
                spec = TechnologySpec('table', {'values': list(np.cumsum(steps))})
            if rng.random() < 0.5:
                costs = 0.0 if rng.random() < 0.1 else float(rng.uniform(0.05, 2))
            else:
                costs = [float(c) for c in rng.choice([0.0, 0.3, 0.7, 1.1, 1.9], n)]
            config = GameConfig.build(n=n, costs=costs, rho=float(rng.uniform(0, 1)), t_tot=1, beta=1, technology=spec)
            fast = EquilibriumService.enumerate_pne(config, method='anonymous')
            brute = EquilibriumService.enumerate_pne(config, method='brute-force')
            self.assertEqual(fast.level_counts(), brute.level_counts(), (spec, costs, config.rho))
            for level in fast.pne_levels:
                self.assertIn(level.witness, brute.pne)
            fast_max = EquilibriumService.potential_maximizers(config, method='anonymous')
            brute_max = EquilibriumService.potential_maximizers(config, method='brute-force')
            self.assertEqual(fast_max.level_counts('potmax'), brute_max.level_counts('potmax'))

    def test_zero_cost_contributor_is_indifferent(self):
        flat = GameConfig.build(n=2, costs=0.0, rho=0.5, t_tot=1, beta=1,
                                technology={'kind': 'table', 'params': {'values': [0.0, 0.0, 0.0]}})
        for method in ('anonymous', 'brute-force'):
            self.assertEqual(EquilibriumService.enumerate_pne(flat, method).level_counts(), {0: 1, 1: 2, 2: 1})
        mixed = GameConfig.build(n=3, costs=[0.0, 1.0, 1.0], rho=0.5, t_tot=1, beta=1,
                                 technology={'kind': 'threshold', 'params': {'tau': 3, 'v_high': 30.0}})
        fast = EquilibriumService.enumerate_pne(mixed, method='anonymous')
        brute = EquilibriumService.enumerate_pne(mixed, method='brute-force')
        self.assertEqual(fast.level_counts(), {0: 1, 1: 1, 3: 1})
        self.assertEqual(fast.level_counts(), brute.level_counts())

    def test_analyze_flags_consistency(self):
        flat = GameConfig.build(n=2, costs=0.0, rho=0.5, t_tot=1, beta=1,
                                technology={'kind': 'table', 'params': {'values': [0.0, 0.0, 0.0]}})
        report = EquilibriumService.analyze(flat)
        self.assertEqual(report.level_counts('pne'), report.level_counts('potmax'))
        self.assertTrue(report.consistent)
        self.assertTrue(EquilibriumReportSerializer(report).data['consistent'])

    def test_analyze_marks_potmax_outside_pne(self):
        config = threshold_config(rho=0.8)
        with mock.patch.object(EquilibriumService, 'level_equilibria', return_value=()):
            with self.assertLogs('airdrop_lab', level='ERROR'):
                report = EquilibriumService.analyze(config)
        self.assertFalse(report.consistent)


class PotentialMaximizerTests(SimpleTestCase):

    def test_and_game_selects_full_contribution(self):
        report = EquilibriumService.potential_maximizers(and_game(), method='brute-force')
        self.assertEqual(report.potmax, ((1.0, 1.0),))
        self.assertEqual(report.limit_distribution, {(1.0, 1.0): 1.0})

    def test_critical_rho_edge_case(self):
        report = EquilibriumService.potential_maximizers(threshold_config(rho=0.5), method='brute-force')
        self.assertEqual(report.level_counts('potmax'), {0: 1, 5: 252})
        high = report.limit_mass(lambda ell: ell >= 5)
        self.assertAlmostEqual(high, 252 / 253)
        self.assertAlmostEqual(high, DesignerRegimeService.threshold_edge_mass(threshold_config(rho=0.5)))
        fast = EquilibriumService.potential_maximizers(threshold_config(rho=0.5))
        self.assertAlmostEqual(fast.limit_distribution[5], 252 / 253)

    def test_zero_reward_selects_zero_profile(self):
        report = EquilibriumService.potential_maximizers(threshold_config(rho=0.0), method='brute-force')
        self.assertEqual(report.potmax, ((0.0,) * 10,))

    def test_potmax_subset_of_pne_and_normalized(self):
        for rho in (0.2, 0.5, 0.8):
            report = EquilibriumService.analyze(threshold_config(n=8, tau=4, rho=rho), method='brute-force')
            self.assertTrue(set(report.potmax) <= set(report.pne))
            self.assertAlmostEqual(sum(report.limit_distribution.values()), 1.0)

    def test_critical_rho_consistency(self):
        for n, tau, v_high in ((8, 3, 40.0), (12, 6, 90.0), (6, 6, 30.0)):
            config = threshold_config(n=n, tau=tau, v_high=v_high)
            rho_c = DesignerRegimeService.threshold_critical_rho(config)
            for rho in (rho_c * 0.9, rho_c * 1.1):
                if rho > 1:
                    continue
                counts = EquilibriumService.potential_maximizers(config.with_rho(rho), method='brute-force').level_counts('potmax')
                if rho > rho_c:
                    self.assertEqual(set(counts), {tau})
                else:
                    self.assertEqual(counts, {0: 1})

    def test_argmax_invariant_under_rescaling(self):
        base = threshold_config(n=8, tau=4, v_high=50.0, alpha=1.0, rho=0.7)
        scaled = threshold_config(n=8, tau=4, v_high=150.0, alpha=3.0, rho=0.7)
        self.assertEqual(EquilibriumService.analyze(base).pne_levels, EquilibriumService.analyze(scaled).pne_levels)
        self.assertEqual(EquilibriumService.analyze(base).potmax_levels, EquilibriumService.analyze(scaled).potmax_levels)
        self.assertAlmostEqual(DesignerRegimeService.threshold_critical_rho(base),
                               DesignerRegimeService.threshold_critical_rho(scaled))

    def test_report_serialization(self):
        data = EquilibriumReportSerializer(EquilibriumService.analyze(threshold_config())).data
        self.assertEqual(data['method'], 'anonymous')
        self.assertEqual([level['ell'] for level in data['pne_levels']], [0, 5])
        self.assertAlmostEqual(sum(item['probability'] for item in data['limit_distribution']), 1.0)


class DesignerRegimeTests(SimpleTestCase):

    def test_critical_rho(self):
        self.assertAlmostEqual(DesignerRegimeService.threshold_critical_rho(threshold_config()), 0.5)
        self.assertAlmostEqual(DesignerRegimeService.threshold_critical_rho(threshold_config(v_high=40.0)), 1.25)
        self.assertLess(DesignerRegimeService.threshold_critical_rho(threshold_config(v_high=1e12)), 1e-9)

    def test_critical_rho_requires_uniform_costs(self):
        config = GameConfig.build(n=3, costs=[1, 2, 3], rho=0.5, t_tot=1, beta=1,
                                  technology={'kind': 'threshold', 'params': {'tau': 2, 'v_high': 10}})
        with self.assertRaises(UnsupportedCombinationError):
            DesignerRegimeService.threshold_critical_rho(config)

    def test_designer_regimes(self):
        # α·n·τ = 30, ΔV = 50, coupure 25
        regime = DesignerRegimeService.threshold_designer_regime(
            threshold_config(n=10, tau=3, alpha=1.0, v_low=50.0, v_high=100.0))
        self.assertEqual(regime.regime, 'no-airdrop-optimal')
        self.assertEqual(regime.recommended_rho, 0.0)
        self.assertAlmostEqual(regime.guaranteed_profit, 50.0)

        regime = DesignerRegimeService.threshold_designer_regime(
            threshold_config(n=10, tau=6, alpha=1.0, v_low=50.0, v_high=100.0), d_v=5.0)
        self.assertEqual(regime.regime, 'no-airdrop-forced')
        self.assertAlmostEqual(regime.guaranteed_profit, 45.0)

        regime = DesignerRegimeService.threshold_designer_regime(threshold_config(), d_v=10.0)
        self.assertEqual(regime.regime, 'airdrop-optimal')
        self.assertAlmostEqual(regime.recommended_rho, 0.501)
        self.assertAlmostEqual(regime.guaranteed_profit, (1 - 0.501) * 100 - 10)
        self.assertEqual(regime.epsilon, 1e-3)

    def test_single_transition_without_low_value(self):
        below = DesignerRegimeService.threshold_designer_regime(threshold_config(v_high=51.0))
        above = DesignerRegimeService.threshold_designer_regime(threshold_config(v_high=49.0))
        self.assertEqual(below.regime, 'airdrop-optimal')
        self.assertEqual(above.regime, 'no-airdrop-forced')
        boundary = DesignerRegimeService.threshold_designer_regime(threshold_config(v_high=50.0))
        self.assertTrue(boundary.boundary)
        self.assertEqual(boundary.regime, 'no-airdrop-forced')

    def test_linear_optimal_rho(self):
        optimum = DesignerRegimeService.linear_optimal_rho([1.0, 2.0, 10.0], 9.0)
        self.assertEqual(optimum.ell_star, 1)
        self.assertAlmostEqual(optimum.rho_star, 1 / 3)
        self.assertAlmostEqual(optimum.profit, 6.0)

        n, alpha, lambda_v = 5, 0.5, 4.0
        optimum = DesignerRegimeService.linear_optimal_rho([alpha] * n, lambda_v, n=n, d_v=1.0)
        self.assertEqual(optimum.ell_star, n)
        self.assertAlmostEqual(optimum.rho_star, n * alpha / lambda_v)
        self.assertAlmostEqual(optimum.profit, lambda_v * n - alpha * n ** 2 - 1.0)

        optimum = DesignerRegimeService.linear_optimal_rho([1.0] * 5, 4.0)
        self.assertEqual((optimum.rho_star, optimum.ell_star), (0.0, 0))

    def test_linear_optimal_rho_sorts_costs(self):
        optimum = DesignerRegimeService.linear_optimal_rho([10.0, 1.0, 2.0], 9.0)
        self.assertEqual(optimum.permutation, (1, 2, 0))
        self.assertEqual(optimum.contributors, (1,))
        with self.assertRaises(InvalidConfigError):
            DesignerRegimeService.linear_optimal_rho([1.0], 0.0)

    def test_linear_all_or_nothing(self):
        config = GameConfig.build(n=4, costs=1.0, rho=0.9, t_tot=1, beta=1,
                                  technology={'kind': 'linear', 'params': {'lambda_v': 5.0}})
        result = DesignerRegimeService.linear_equilibrium_value(config)
        self.assertEqual(result.value, 20.0)
        self.assertEqual(EquilibriumService.enumerate_pne(config).equilibrium_levels(), [4])
        result = DesignerRegimeService.linear_equilibrium_value(config.with_rho(0.7))
        self.assertEqual(result.value, 0.0)

    def test_quadratic_regimes(self):
        self.assertEqual(DesignerRegimeService.quadratic_regimes(0.0005, 10, 100).region, 1)
        self.assertEqual(DesignerRegimeService.quadratic_regimes(0.01, 10, 100).region, 2)
        self.assertEqual(DesignerRegimeService.quadratic_regimes(0.2, 10, 100).region, 3)
        self.assertTrue(DesignerRegimeService.quadratic_regimes(0.1, 10, 100).boundary)
        regime = DesignerRegimeService.quadratic_regimes(0.01, 10, 100, rho=0.5)
        self.assertEqual(regime.selected, 'good')
        self.assertTrue(regime.bad_pne and regime.good_pne)

    def test_quadratic_selection_matches_potential(self):
        config = GameConfig.build(n=10, costs=0.05, rho=0.6, t_tot=1, beta=1,
                                  technology={'kind': 'quadratic', 'params': {'tau': 10}})
        self.assertEqual(DesignerRegimeService.quadratic_regimes_for(config).selected, 'good')
        self.assertEqual(EquilibriumService.potential_maximizers(config).level_counts('potmax'), {10: 1})

        config = GameConfig.build(n=20, costs=0.2, rho=1.0, t_tot=1, beta=1,
                                  technology={'kind': 'quadratic', 'params': {'tau': 10}})
        self.assertEqual(DesignerRegimeService.quadratic_regimes_for(config).region, 3)
        self.assertEqual(EquilibriumService.potential_maximizers(config).level_counts('potmax'), {0: 1})

    def test_quadratic_equilibrium_existence(self):
        for rho in (0.05, 0.3, 0.9):
            config = GameConfig.build(n=6, costs=0.02, rho=rho, t_tot=1, beta=1,
                                      technology={'kind': 'quadratic', 'params': {'tau': 4}})
            bad, good = DesignerRegimeService.quadratic_equilibria(0.02, 4, 6, rho)
            levels = EquilibriumService.enumerate_pne(config).equilibrium_levels()
            self.assertEqual(0 in levels, bad)
            self.assertEqual(6 in levels, good)

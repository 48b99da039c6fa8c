# games/tests.py
# Tests du modèle de jeu et des fonctions technologiques

import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from .domain import ContributionLevel, GameConfig, Profile
from .serializers import GameConfigSerializer
from .services.game_service import GameService
from .technologies import TechnologySpec, make_technology


def example_one(rho=1.0, d_v=0.0):
    """n=10, τ=5, V_low=0, V_high=100, T_tot=10, α=1."""
    return GameConfig.build(
        n=10, costs=1.0, rho=rho, t_tot=10.0, beta=1.0, d_v=d_v,
        technology={'kind': 'threshold', 'params': {'tau': 5, 'v_low': 0.0, 'v_high': 100.0}},
    )


def and_game(rho=1.0, alpha=1.0, beta=1.0, v_high=8.0):
    return GameConfig.build(
        n=2, costs=alpha, rho=rho, t_tot=1.0, beta=beta,
        technology={'kind': 'table', 'params': {'values': [0.0, 0.0, v_high]}},
    )


def level_profile(n, ell):
    return tuple([1.0] * ell + [0.0] * (n - ell))


def close(a, b, rel):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


class TechnologyTests(SimpleTestCase):

    def test_threshold_evaluation(self):
        tech = make_technology(TechnologySpec('threshold', {'tau': 5, 'v_low': 0, 'v_high': 100}), 10)
        self.assertEqual(tech.eval_anonymous(4), 0.0)
        self.assertEqual(tech.eval_anonymous(5), 100.0)

    def test_closed_families(self):
        self.assertEqual(make_technology(TechnologySpec('quadratic', {'tau': 10}), 100).eval_anonymous(20), 40.0)
        self.assertEqual(make_technology(TechnologySpec('sshaped', {'tau': 1, 'c': 1}), 3).eval_anonymous(1), 0.5)
        self.assertAlmostEqual(make_technology(TechnologySpec('concave', {'tau': 2, 'c': 0.5}), 5).eval_anonymous(4), 1.0)
        self.assertEqual(make_technology(TechnologySpec('sshaped', {'tau': 2, 'c': 3}), 3).eval_anonymous(0), 0.0)
        self.assertEqual(make_technology(TechnologySpec('concave', {'tau': 2, 'c': 0.3}), 3).eval_anonymous(0), 0.0)

    def test_table_monotonicity(self):
        make_technology(TechnologySpec('table', {'values': [0, 0, 5, 5]}), 3)
        with self.assertRaises(InvalidConfigError) as ctx:
            make_technology(TechnologySpec('table', {'values': [0, 5, 3]}), 2)
        self.assertEqual(ctx.exception.field, 'technology.params.values')

    def test_invalid_threshold_names_field(self):
        with self.assertRaises(InvalidConfigError) as ctx:
            make_technology(TechnologySpec('threshold', {'tau': 0, 'v_high': 10}), 10)
        self.assertEqual(ctx.exception.field, 'technology.params.tau')
        with self.assertRaises(InvalidConfigError):
            make_technology(TechnologySpec('threshold', {'tau': 3, 'v_low': 10, 'v_high': 10}), 10)

    def test_eval_profile(self):
        linear = make_technology(TechnologySpec('linear', {'lambda_v': 2}), 3)
        self.assertEqual(linear.eval_profile((1.0, 0.0, 1.0)), 4.0)
        self.assertEqual(linear.eval_profile((0.0, 0.0, 0.0)), 0.0)
        and_tech = make_technology(TechnologySpec('table', {'values': [0, 0, 8]}), 2)
        self.assertEqual(and_tech.eval_profile((1.0, 1.0)), 8.0)

    def test_table_rejects_fractional_level(self):
        tech = make_technology(TechnologySpec('table', {'values': [0, 1, 2]}), 2)
        with self.assertRaises(UnsupportedCombinationError):
            tech.eval_profile((0.5, 1.0))

    def test_level_out_of_range(self):
        tech = make_technology(TechnologySpec('linear', {'lambda_v': 1}), 4)
        with self.assertRaises(InvalidConfigError):
            tech.eval_anonymous(5)

    def test_profile_level_above_n(self):
        config = GameConfig.build(n=2, costs=1, rho=0.5, t_tot=1, beta=1, actions=[0.0, 1.0, 2.0],
                                  technology={'kind': 'linear', 'params': {'lambda_v': 2}})
        self.assertEqual(GameService.system_value(config, (2.0, 1.0)), 6.0)
        quadratic = make_technology(TechnologySpec('quadratic', {'tau': 1}), 2)
        self.assertEqual(quadratic.eval_profile((1.5, 1.5)), 9.0)
        with self.assertRaises(InvalidConfigError):
            quadratic.eval_profile((-1.0, 0.0))

    def test_table_rejects_level_above_n(self):
        tech = make_technology(TechnologySpec('table', {'values': [0, 1, 2]}), 2)
        with self.assertRaises(UnsupportedCombinationError):
            tech.eval_profile((2.0, 1.0))

    def test_monotone_in_level(self):
        specs = [
            TechnologySpec('threshold', {'tau': 4, 'v_low': 1, 'v_high': 9}),
            TechnologySpec('linear', {'lambda_v': 0.3}),
            TechnologySpec('quadratic', {'tau': 2.5}),
            TechnologySpec('sshaped', {'tau': 3, 'c': 2}),
            TechnologySpec('concave', {'tau': 3, 'c': 0.4}),
            TechnologySpec('table', {'values': [0, 1, 1, 4, 4, 4, 7, 9]}),
        ]
        for spec in specs:
            values = make_technology(spec, 7).level_values()
            self.assertTrue(np.all(np.diff(values) >= 0), spec.kind)

    def test_anonymity_over_equal_levels(self):
        tech = make_technology(TechnologySpec('sshaped', {'tau': 2, 'c': 1.5}), 5)
        for ell in range(6):
            values = {tech.eval_profile(p) for p in itertools.product((0.0, 1.0), repeat=5) if sum(p) == ell}
            self.assertEqual(len(values), 1)

    def test_steepness(self):
        threshold = make_technology(TechnologySpec('threshold', {'tau': 5, 'v_high': 100}), 10)
        self.assertEqual(threshold.steepness(0, 3), 0.0)
        self.assertEqual(threshold.steepness(0, 4), 0.0)
        self.assertEqual(threshold.steepness(2, 6), 100.0)
        linear = make_technology(TechnologySpec('linear', {'lambda_v': 2.5}), 10)
        self.assertAlmostEqual(linear.steepness(1, 8), 2.5)

    def test_general_technology(self):
        values = {(0.0, 0.0): 0.0, (1.0, 0.0): 1.0, (0.0, 1.0): 2.0, (1.0, 1.0): 5.0}
        config = GameConfig.build(n=2, costs=[0.5, 0.5], rho=0.5, t_tot=1, beta=1,
                                  technology=TechnologySpec('general', {'values': values}))
        self.assertEqual(GameService.system_value(config, (0, 1)), 2.0)
        with self.assertRaises(UnsupportedCombinationError):
            config.technology.eval_anonymous(1)

    def test_general_technology_must_be_total_and_monotone(self):
        partial = {(0.0, 0.0): 0.0, (1.0, 1.0): 5.0}
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=2, costs=1, rho=0.5, t_tot=1, beta=1,
                             technology=TechnologySpec('general', {'values': partial}))
        decreasing = {(0.0, 0.0): 3.0, (1.0, 0.0): 1.0, (0.0, 1.0): 4.0, (1.0, 1.0): 5.0}
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=2, costs=1, rho=0.5, t_tot=1, beta=1,
                             technology=TechnologySpec('general', {'values': decreasing}))


class GameConfigTests(SimpleTestCase):

    def test_defaults(self):
        config = example_one()
        self.assertTrue(config.is_binary)
        self.assertEqual(config.uniform_cost, 1.0)
        self.assertEqual(config.profile_count, 1024)

    def test_heterogeneous_costs(self):
        config = GameConfig.build(n=3, costs=[1, 2, 3], rho=0.2, t_tot=1, beta=1,
                                  technology={'kind': 'linear', 'params': {'lambda_v': 1}})
        self.assertIsNone(config.uniform_cost)

    def test_invariants(self):
        tech = {'kind': 'linear', 'params': {'lambda_v': 1}}
        with self.assertRaises(InvalidConfigError) as ctx:
            GameConfig.build(n=3, costs=1, rho=1.5, t_tot=1, beta=1, technology=tech)
        self.assertEqual(ctx.exception.field, 'rho')
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=0, costs=1, rho=0.5, t_tot=1, beta=1, technology=tech)
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=3, costs=[1, 2], rho=0.5, t_tot=1, beta=1, technology=tech)
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=2, costs=1, rho=0.5, t_tot=1, beta=1, technology=tech, actions=[1.0, 0.0])
        with self.assertRaises(InvalidConfigError):
            GameConfig.build(n=2, costs=1, rho=0.5, t_tot=1, beta=1, technology=tech, actions=[[0.0, 0.0], [0.0, 1.0]])

    def test_single_player_game(self):
        config = GameConfig.build(n=1, costs=1, rho=1, t_tot=1, beta=1,
                                  technology={'kind': 'linear', 'params': {'lambda_v': 3}})
        self.assertEqual(GameService.utility(config, (1.0,), 0), 2.0)

    def test_profile_validation(self):
        config = example_one()
        with self.assertRaises(InvalidConfigError):
            Profile.of(config, (0.5,) + (0.0,) * 9)
        with self.assertRaises(InvalidConfigError):
            Profile.of(config, (0.0,) * 9)

    def test_contribution_level(self):
        with self.assertRaises(InvalidConfigError):
            ContributionLevel(ell=11, n=10)
        profile = ContributionLevel(ell=2, n=4).cheapest_profile((3.0, 1.0, 2.0, 1.0))
        self.assertEqual(profile.a, (0.0, 1.0, 0.0, 1.0))


class GameServiceTests(SimpleTestCase):

    def test_token_value(self):
        self.assertEqual(GameService.token_value(100, 10), 10)
        self.assertEqual(GameService.token_value(0, 5), 0)
        self.assertEqual(GameService.token_value(7, 7), 1)
        with self.assertRaises(InvalidConfigError):
            GameService.token_value(1, 0)

    def test_per_player_tokens(self):
        self.assertEqual(GameService.per_player_tokens(1, 10, 10), 1)
        self.assertEqual(GameService.per_player_tokens(0, 10, 10), 0)
        self.assertEqual(GameService.per_player_tokens(0.5, 20, 10), 1)
        with self.assertRaises(InvalidConfigError):
            GameService.per_player_tokens(1.2, 10, 10)

    def test_utility_examples(self):
        config = example_one()
        self.assertAlmostEqual(GameService.utility(config, level_profile(10, 5), 0), 9.0)
        self.assertEqual(GameService.utility(config, level_profile(10, 0), 3), 0.0)
        self.assertAlmostEqual(GameService.utility(and_game(), (1.0, 1.0), 0), 3.0)
        with self.assertRaises(InvalidConfigError):
            GameService.utility(config, level_profile(10, 5), 10)

    def test_utility_matches_token_reward(self):
        config = example_one(rho=0.7)
        profile = level_profile(10, 6)
        gamma = GameService.per_player_tokens(config.rho, config.t_tot, config.n)
        token = GameService.token_value(GameService.system_value(config, profile), config.t_tot)
        via_tokens = gamma * token - config.costs[0]
        self.assertTrue(close(GameService.utility(config, profile, 0), via_tokens, 1e-12))

    def test_potential_examples(self):
        at_critical = example_one(rho=0.5)
        self.assertAlmostEqual(GameService.potential(at_critical, level_profile(10, 5)), 0.0)
        self.assertEqual(GameService.potential(at_critical, level_profile(10, 0)), 0.0)
        self.assertEqual(GameService.potential(and_game(), (1.0, 0.0)), -1.0)

    def test_metrics(self):
        metrics = GameService.metrics(example_one(rho=1.0), level_profile(10, 5))
        self.assertEqual(metrics.designer_profit, 0.0)
        metrics = GameService.metrics(example_one(rho=0.5, d_v=10), level_profile(10, 5))
        self.assertAlmostEqual(metrics.designer_profit, 40.0)
        self.assertAlmostEqual(metrics.users_welfare, 45.0)
        self.assertAlmostEqual(metrics.token_value, metrics.system_value / 10)
        self.assertTrue(close(metrics.users_welfare, 0.5 * metrics.system_value - metrics.social_cost, 1e-12))

    def test_potential_grid_matches_pointwise(self):
        config = and_game(rho=0.5)
        grid = GameService.potential_grid(config)
        for index in np.ndindex(grid.shape):
            profile = tuple(config.actions[i][k] for i, k in enumerate(index))
            self.assertAlmostEqual(grid[index], GameService.potential(config, profile))


def random_config(rng):
    """Configuration aléatoire de petite taille, toutes familles confondues."""
    n = int(rng.integers(1, 5))
    kind = str(rng.choice(['threshold', 'linear', 'quadratic', 'sshaped', 'concave', 'table', 'general']))
    binary = kind == 'table' or rng.random() < 0.4
    if binary:
        actions = None
        action_sets = [(0.0, 1.0)] * n
    else:
        action_sets = []
        for _ in range(n):
            size = int(rng.integers(1, 4))
            action_sets.append(tuple(sorted({round(float(x), 3) for x in rng.uniform(0, 2, size)})))
        actions = [list(s) for s in action_sets]
    if kind == 'threshold':
        params = {'tau': int(rng.integers(1, n + 1)), 'v_low': float(rng.uniform(0, 5)), 'v_high': float(rng.uniform(6, 50))}
    elif kind == 'linear':
        params = {'lambda_v': float(rng.uniform(0.1, 10))}
    elif kind == 'quadratic':
        params = {'tau': float(rng.uniform(0.5, 5))}
    elif kind == 'sshaped':
        params = {'tau': float(rng.uniform(0.5, 3)), 'c': float(rng.uniform(0.5, 4))}
    elif kind == 'concave':
        params = {'tau': float(rng.uniform(0.5, 3)), 'c': float(rng.uniform(0.1, 0.9))}
    elif kind == 'table':
        params = {'values': list(np.cumsum(rng.uniform(0, 3, n + 1)))}
    else:
        weights = rng.uniform(0, 3, n)
        bonus = float(rng.uniform(0, 5))
        params = {'values': {
            p: float(np.dot(weights, np.square(p)) + bonus * min(p))
            for p in itertools.product(*action_sets)
        }}
    return GameConfig.build(
        n=n, costs=[float(c) for c in rng.uniform(0, 2, n)], rho=float(rng.uniform(0, 1)),
        t_tot=float(rng.uniform(1, 100)), beta=1.0, technology=TechnologySpec(kind, params), actions=actions,
    )


class GamePropertyTests(SimpleTestCase):

    def test_exact_potential_over_random_configs(self):
        rng = np.random.default_rng(20240601)
        for _ in range(1000):
            config = random_config(rng)
            profile = tuple(float(rng.choice(s)) for s in config.actions)
            phi = GameService.potential(config, profile)
            for i in range(config.n):
                u = GameService.utility(config, profile, i)
                for x in config.actions[i]:
                    deviation = profile[:i] + (x,) + profile[i + 1:]
                    du = u - GameService.utility(config, deviation, i)
                    dphi = phi - GameService.potential(config, deviation)
                    self.assertTrue(close(du, dphi, 1e-10), (config.technology.kind, profile, deviation))

    def test_welfare_decomposition_and_reward_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            config = random_config(rng)
            profile = tuple(float(rng.choice(s)) for s in config.actions)
            total = math.fsum(GameService.utility(config, profile, i) for i in range(config.n))
            self.assertTrue(close(total, GameService.users_welfare(config, profile), 1e-10))
            value = GameService.system_value(config, profile)
            gamma = GameService.per_player_tokens(config.rho, config.t_tot, config.n)
            self.assertTrue(close(gamma * GameService.token_value(value, config.t_tot), config.reward_rate * value, 1e-12))

    def test_componentwise_monotone_value(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            config = random_config(rng)
            profiles = list(itertools.product(*config.actions))
            for a, b in itertools.product(profiles, repeat=2):
                if all(x <= y for x, y in zip(a, b)):
                    self.assertLessEqual(GameService.system_value(config, a), GameService.system_value(config, b) + 1e-12)


class GameConfigSerializerTests(SimpleTestCase):

    def payload(self, **overrides):
        data = {
            'n': 10, 'costs': 1.0, 'rho': 0.5, 't_tot': 10, 'beta': 1.13,
            'technology': {'kind': 'threshold', 'params': {'tau': 5, 'v_low': 0, 'v_high': 100}},
        }
        data.update(overrides)
        return data

    def test_minimal_threshold_config(self):
        serializer = GameConfigSerializer(data=self.payload())
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.to_game_config()
        self.assertEqual(config.technology.tau, 5)
        self.assertEqual(config.costs, (1.0,) * 10)

    def test_default_beta(self):
        data = self.payload()
        del data['beta']
        serializer = GameConfigSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.validated_data['beta'], 1.13)

    def test_tau_out_of_range_is_invariant(self):
        serializer = GameConfigSerializer(data=self.payload(
            technology={'kind': 'threshold', 'params': {'tau': 0, 'v_high': 100}}))
        self.assertFalse(serializer.is_valid())
        self.assertEqual(serializer.errors['technology']['params']['tau'][0].code, 'min_value')
        serializer = GameConfigSerializer(data=self.payload(
            technology={'kind': 'threshold', 'params': {'tau': 11, 'v_high': 100}}))
        self.assertFalse(serializer.is_valid())
        self.assertEqual(serializer.errors['technology']['params']['tau'][0].code, 'max_value')

    def test_rho_out_of_range(self):
        serializer = GameConfigSerializer(data=self.payload(rho=1.5))
        self.assertFalse(serializer.is_valid())
        self.assertEqual(serializer.errors['rho'][0].code, 'max_value')

    def test_schema_errors(self):
        data = self.payload(costs='cher')
        del data['n']
        serializer = GameConfigSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        self.assertEqual(serializer.errors['n'][0].code, 'required')
        self.assertEqual(serializer.errors['costs'][0].code, 'invalid')

    def test_general_values_pairs(self):
        serializer = GameConfigSerializer(data=self.payload(
            n=1, costs=[0.5], technology={'kind': 'general', 'params': {'values': [[[0], 0], [[1], 2]]}}))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.to_game_config()
        self.assertEqual(GameService.system_value(config, (1.0,)), 2.0)

# experiments/tests.py
# Tests du chargement de configuration, des écritures et des commandes d'expérience

import copy
import csv
import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from common.exceptions import ConfigParseError, InvalidConfigError, SchemaError
from .models import ExperimentRun
from .services.config_loader import ConfigLoader, flatten_errors
from .services.output_service import OutputWriter, json_safe

BASE_DOCUMENT = {
    'n': 10,
    'costs': 1.0,
    'rho': 0.5,
    't_tot': 10,
    'beta': 1.13,
    'technology': {'kind': 'threshold', 'params': {'tau': 5, 'v_low': 0, 'v_high': 100}},
    'experiment': {'kind': 'equilibria'},
}


def document(**changes):
    doc = copy.deepcopy(BASE_DOCUMENT)
    experiment = changes.pop('experiment', None)
    if experiment is not None:
        doc['experiment'] = experiment
    doc.update(changes)
    return doc


def read_csv(path):
    """Renvoie (lignes de commentaire, lignes de données)."""
    with open(path, encoding='utf-8', newline='') as f:
        lines = f.read().split('\n')
    comments = [line for line in lines if line.startswith('#')]
    body = [line for line in lines if line and not line.startswith('#')]
    return comments, list(csv.DictReader(body))


class ConfigLoaderTests(SimpleTestCase):

    def test_minimal_threshold_config_is_valid(self):
        experiment = ConfigLoader.validate(document())
        self.assertEqual(experiment.kind, 'equilibria')
        self.assertEqual(experiment.game.n, 10)
        self.assertEqual(experiment.game.technology.tau, 5)
        self.assertEqual(experiment.game.uniform_cost, 1.0)
        self.assertEqual(len(experiment.config_hash), 64)
        self.assertEqual((experiment.output_dir, experiment.output_format), ('out', 'csv'))

    def test_zero_tau_names_field(self):
        doc = document(technology={'kind': 'threshold', 'params': {'tau': 0, 'v_high': 100}})
        with self.assertRaises(InvalidConfigError) as ctx:
            ConfigLoader.validate(doc)
        self.assertEqual(ctx.exception.field, 'technology.params.tau')
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_rho_out_of_range_is_invariant_error(self):
        with self.assertRaises(InvalidConfigError) as ctx:
            ConfigLoader.validate(document(rho=1.5))
        self.assertEqual(ctx.exception.field, 'rho')
        self.assertEqual(ctx.exception.exit_code, 4)

    def test_missing_field_is_schema_error(self):
        doc = document()
        del doc['n']
        with self.assertRaises(SchemaError) as ctx:
            ConfigLoader.validate(doc)
        self.assertEqual(ctx.exception.field, 'n')
        self.assertEqual(ctx.exception.exit_code, 3)

    def test_wrong_type_and_unknown_kind_are_schema_errors(self):
        with self.assertRaises(SchemaError):
            ConfigLoader.validate(document(n='dix'))
        with self.assertRaises(SchemaError) as ctx:
            ConfigLoader.validate(document(technology={'kind': 'cubic', 'params': {}}))
        self.assertEqual(ctx.exception.field, 'technology.kind')
        with self.assertRaises(SchemaError) as ctx:
            ConfigLoader.validate(document(experiment={'kind': 'plot'}))
        self.assertEqual(ctx.exception.field, 'experiment.kind')
        with self.assertRaises(SchemaError):
            ConfigLoader.validate([1, 2, 3])

    def test_cross_field_invariant(self):
        doc = document(technology={'kind': 'threshold', 'params': {'tau': 5, 'v_low': 100, 'v_high': 50}})
        with self.assertRaises(InvalidConfigError) as ctx:
            ConfigLoader.validate(doc)
        self.assertEqual(ctx.exception.field, 'technology.params.v_high')

    def test_stochastic_kind_requires_seeds(self):
        doc = document(experiment={'kind': 'hitting', 'trials': 10, 'targets': [5]})
        with self.assertRaises(InvalidConfigError) as ctx:
            ConfigLoader.validate(doc)
        self.assertEqual(ctx.exception.field, 'experiment.seeds')
        experiment = ConfigLoader.validate(doc, seed=7)
        self.assertEqual(experiment.seeds, [7])

    def test_empty_grid_is_invariant_error(self):
        with self.assertRaises(InvalidConfigError) as ctx:
            ConfigLoader.validate(document(experiment={'kind': 'phase', 'rho_grid': []}))
        self.assertEqual(ctx.exception.field, 'experiment.rho_grid')

    def test_linspace_grid(self):
        doc = document(experiment={'kind': 'phase', 'rho_grid': {'start': 0, 'stop': 1, 'num': 5}})
        experiment = ConfigLoader.validate(doc)
        self.assertEqual(experiment.params['rho_grid'], [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_hash_ignores_output_and_key_order(self):
        first = ConfigLoader.validate(document(output={'dir': 'a', 'format': 'json'}))
        reordered = dict(reversed(list(document().items())))
        second = ConfigLoader.validate(reordered, output_dir='b')
        self.assertEqual(first.config_hash, second.config_hash)
        self.assertNotEqual(first.config_hash, ConfigLoader.validate(document(rho=0.6)).config_hash)
        seeded = document(experiment={'kind': 'simulate', 'steps': 10, 'seeds': [1]})
        self.assertNotEqual(ConfigLoader.validate(seeded).config_hash,
                            ConfigLoader.validate(seeded, seed=2).config_hash)

    def test_beta_defaults_when_absent(self):
        doc = document()
        del doc['beta']
        self.assertEqual(ConfigLoader.validate(doc).game.beta, 1.13)

    def test_parse_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.json'
            path.write_text('{"n": 10,', encoding='utf-8')
            with self.assertRaises(ConfigParseError) as ctx:
                ConfigLoader.load_config(path)
            self.assertEqual(ctx.exception.exit_code, 2)
            with self.assertRaises(ConfigParseError):
                ConfigLoader.load_config(Path(tmp) / 'absent.json')

    def test_flatten_nested_errors(self):
        serializer_errors = {'technology': {'params': {'tau': ['trop petit']}}}
        self.assertEqual(flatten_errors(serializer_errors), [('technology.params.tau', 'trop petit', 'invalid')])


class OutputWriterTests(SimpleTestCase):

    def test_csv_header_and_reproducible_floats(self):
        with tempfile.TemporaryDirectory() as tmp:
            writer = OutputWriter(tmp, 'abc123', 'stationary', reproducible=True)
            path = writer.write_csv('table.csv', ['ell', 'prob', 'note'], [
                {'ell': 0, 'prob': 0.1, 'note': 'x'},
                {'ell': 1, 'prob': math.inf, 'note': None},
            ])
            raw = Path(path).read_bytes()
            self.assertNotIn(b'\r', raw)
            comments, rows = read_csv(path)
        self.assertEqual(comments, ['# config_hash=abc123', '# kind=stationary'])
        self.assertEqual(rows[0], {'ell': '0', 'prob': '0.10000000000000001', 'note': 'x'})
        self.assertEqual(rows[1], {'ell': '1', 'prob': 'inf', 'note': ''})
        self.assertEqual(writer.written, [path])

    def test_timestamp_outside_reproducible_mode(self):
        with tempfile.TemporaryDirectory() as tmp:
            writer = OutputWriter(tmp, 'abc', 'profit')
            comments, _ = read_csv(writer.write_csv('t.csv', ['a'], [{'a': 1.5}]))
        self.assertTrue(comments[-1].startswith('# generated_at='))

    def test_json_non_finite_values(self):
        with tempfile.TemporaryDirectory() as tmp:
            writer = OutputWriter(tmp, 'abc', 'times', reproducible=True)
            payload = json.loads(Path(writer.write_json('t.json', {'value': math.inf, 'n': np.int64(3)})).read_text())
        self.assertEqual(payload, {'config_hash': 'abc', 'kind': 'times', 'value': 'inf', 'n': 3})

    def test_json_safe_nested(self):
        converted = json_safe({'a': np.array([1.0, np.nan]), 'b': (np.bool_(True), -math.inf)})
        self.assertEqual(converted, {'a': [1.0, 'nan'], 'b': [True, '-inf']})


class ExperimentCommandTests(TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def run_command(self, name, doc, out='out', **options):
        config_path = self.root / f'{name}.json'
        config_path.write_text(json.dumps(doc), encoding='utf-8')
        stdout = StringIO()
        call_command(name, config=str(config_path), out=str(self.root / out), stdout=stdout, **options)
        return json.loads(stdout.getvalue().strip().splitlines()[-1])

    def test_equilibria_example_one(self):
        summary = self.run_command('equilibria', document(rho=1.0), reproducible=True)
        self.assertEqual(summary['kind'], 'equilibria')
        self.assertEqual(summary['summary']['equilibrium_levels'], [0, 5])
        self.assertTrue(summary['summary']['consistent'])
        report = json.loads((self.root / 'out' / 'equilibria.json').read_text(encoding='utf-8'))
        self.assertEqual(report['config_hash'], summary['config_hash'])
        self.assertNotIn('generated_at', report)
        self.assertEqual(report['designer_regime']['rho_c'], 0.5)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'completed')
        self.assertEqual(run.config_hash, summary['config_hash'])

    def test_stationary_rows_sum_to_one(self):
        summary = self.run_command('stationary', document(experiment={'kind': 'stationary'}))
        comments, rows = read_csv(summary['outputs'][0])
        self.assertEqual(comments[0], f"# config_hash={summary['config_hash']}")
        self.assertEqual([int(row['ell']) for row in rows], list(range(11)))
        self.assertAlmostEqual(math.fsum(float(row['prob']) for row in rows), 1.0, places=12)

    def test_simulate_is_byte_identical_under_reproducible(self):
        doc = document(experiment={'kind': 'simulate', 'steps': 200, 'stride': 10, 'seeds': [3],
                                   'rho_grid': [0.4, 0.8]})
        first = self.run_command('simulate', doc, out='first', reproducible=True)
        second = self.run_command('simulate', doc, out='second', reproducible=True)
        names = sorted(Path(p).name for p in first['outputs'])
        self.assertEqual(names, ['occupancy.csv', 'trajectory_rho0.4_seed3.csv', 'trajectory_rho0.8_seed3.csv'])
        for a, b in zip(sorted(first['outputs']), sorted(second['outputs'])):
            self.assertEqual(Path(a).read_bytes(), Path(b).read_bytes())
        _, rows = read_csv(self.root / 'first' / 'trajectory_rho0.4_seed3.csv')
        self.assertEqual(len(rows), 21)
        self.assertEqual(rows[0]['step'], '0')

    def test_seed_flag_replaces_seeds(self):
        doc = document(experiment={'kind': 'simulate', 'steps': 50, 'seeds': [1, 2]})
        summary = self.run_command('simulate', doc, seed=9, reproducible=True)
        self.assertEqual([Path(p).name for p in summary['outputs']], ['trajectory_seed9.csv', 'occupancy.csv'])

    def test_hitting_outputs(self):
        doc = document(n=6, costs=0.1, beta=1.0, technology={'kind': 'threshold', 'params': {'tau': 3, 'v_high': 10}},
                       experiment={'kind': 'hitting', 'trials': 30, 'targets': [3], 'seeds': [1]})
        summary = self.run_command('hitting', doc, reproducible=True)
        estimate = summary['summary']['estimates'][0]
        self.assertEqual(estimate['censored'], 0)
        self.assertGreater(estimate['exact'], 0)
        payload = json.loads((self.root / 'out' / 'hitting.json').read_text(encoding='utf-8'))
        self.assertEqual(payload['estimates'][0]['trials'], 30)
        _, rows = read_csv(self.root / 'out' / 'hitting_trials.csv')
        self.assertEqual(len(rows), 30)
        self.assertTrue(all(row['censored'] == 'false' for row in rows))

    def test_phase_transition_around_rho_c(self):
        doc = document(beta=50.0, experiment={'kind': 'phase', 'rho_grid': [0.45, 0.5, 0.55]})
        summary = self.run_command('phase', doc, reproducible=True)
        block = summary['summary']['blocks'][0]
        self.assertEqual(block['rho_c'], 0.5)
        self.assertLess(abs(block['rho_half'] - 0.5), 0.02)
        _, rows = read_csv(summary['outputs'][0])
        self.assertEqual([row['side'] for row in rows], ['below', 'critical', 'above'])
        self.assertLess(float(rows[0]['p_high']), 0.01)
        self.assertGreater(float(rows[2]['p_high']), 0.99)

    def test_phase_parameter_study(self):
        doc = document(experiment={'kind': 'phase', 'rho_grid': [0.5], 'beta_grid': [0.5, 1.0],
                                   'alpha_grid': [0.5, 1.0]})
        summary = self.run_command('phase', doc, format='json', reproducible=True)
        self.assertEqual(len(summary['summary']['blocks']), 4)
        study = json.loads((self.root / 'out' / 'phase_stationary.json').read_text(encoding='utf-8'))
        self.assertEqual(len(study['rows']), 4 * 11)

    def test_profit_optimum(self):
        doc = document(n=100, beta=1.13, technology={'kind': 'threshold', 'params': {'tau': 30, 'v_high': 1000}},
                       experiment={'kind': 'profit', 'rho_grid': {'start': 0, 'stop': 1, 'num': 11}})
        summary = self.run_command('profit', doc, reproducible=True)['summary']
        self.assertAlmostEqual(summary['rho_bar'], 0.9115, places=4)
        self.assertLessEqual(summary['rho_star'], summary['rho_bar'])
        _, rows = read_csv(self.root / 'out' / 'profit.csv')
        self.assertEqual(len(rows), 11)
        optimum = json.loads((self.root / 'out' / 'profit_optimum.json').read_text(encoding='utf-8'))
        self.assertEqual(optimum['optimum']['regime'], optimum['curve']['regime'])

    def test_times_hitting_increases_with_cost(self):
        doc = document(beta=1.0, experiment={'kind': 'times', 'alpha_grid': [0.5, 1.0, 2.0]})
        rows = self.run_command('times', doc, reproducible=True)['summary']['rows']
        self.assertEqual([row['alpha'] for row in rows], [0.5, 1.0, 2.0])
        exact = [row['exact_hitting'] for row in rows]
        self.assertLess(exact[0], exact[1])
        self.assertLess(exact[1], exact[2])
        for row in rows:
            self.assertLessEqual(row['lower_bound'], row['exact_hitting'])
        _, table = read_csv(self.root / 'out' / 'times.csv')
        for row in table:
            self.assertAlmostEqual(float(row['first_step_hitting']), float(row['exact_hitting']),
                                   delta=1e-8 * float(row['exact_hitting']))
            self.assertLessEqual(float(row['mix_lower']), float(row['mix_upper']))

    def test_kind_mismatch_exits_with_schema_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('profit', document())
        self.assertEqual(ctx.exception.returncode, 3)

    def test_invalid_config_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command('equilibria', document(rho=1.5))
        self.assertEqual(ctx.exception.returncode, 4)
        self.assertFalse(ExperimentRun.objects.exists())

    def test_unsupported_combination_is_recorded_as_failure(self):
        doc = document(technology={'kind': 'linear', 'params': {'lambda_v': 5}},
                       experiment={'kind': 'phase', 'rho_grid': [0.5]})
        with self.assertRaises(CommandError) as ctx:
            self.run_command('phase', doc)
        self.assertEqual(ctx.exception.returncode, 5)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertIn('seuil', run.error_message)

    def test_runs_lists_ledger(self):
        self.run_command('equilibria', document(rho=1.0))
        stdout = StringIO()
        call_command('runs', stdout=stdout)
        self.assertIn('equilibria', stdout.getvalue())
        self.assertIn('1 exécution(s)', stdout.getvalue())

    def test_runs_with_empty_ledger(self):
        stdout = StringIO()
        call_command('runs', kind='profit', stdout=stdout)
        self.assertIn('Aucune exécution', stdout.getvalue())

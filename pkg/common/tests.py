# common/tests.py
# Tests des utilitaires partagés et des codes de sortie

import math

import numpy as np
from django.test import SimpleTestCase, override_settings
from scipy.special import comb

from .exceptions import (
    AirdropLabError,
    ConfigParseError,
    InvalidConfigError,
    ResourceLimitError,
    SchemaError,
    UnsupportedCombinationError,
)
from .utils import (
    config_hash,
    format_float,
    golden_section_max,
    lab_setting,
    log_binomial,
    parallel_map,
    worker_count,
)


class ExitCodeTests(SimpleTestCase):

    def test_categories_have_distinct_codes(self):
        codes = [cls.exit_code for cls in (ConfigParseError, SchemaError, InvalidConfigError,
                                           UnsupportedCombinationError, ResourceLimitError)]
        self.assertEqual(codes, [2, 3, 4, 5, 6])

    def test_message_names_field(self):
        error = InvalidConfigError("τ doit appartenir à [1, 10]", field='technology.params.tau')
        self.assertEqual(str(error), 'technology.params.tau: τ doit appartenir à [1, 10]')
        self.assertIsInstance(error, AirdropLabError)
        self.assertEqual(str(SchemaError('objet attendu')), 'objet attendu')


class FormatFloatTests(SimpleTestCase):

    def test_reproducible_uses_seventeen_digits(self):
        self.assertEqual(format_float(0.1, reproducible=True), '0.10000000000000001')
        self.assertEqual(format_float(0.1), '0.1')

    def test_special_values(self):
        self.assertEqual(format_float(None), '')
        self.assertEqual(format_float(True), 'true')
        self.assertEqual(format_float(np.int64(7)), '7')
        self.assertEqual(format_float(-math.inf), '-inf')
        self.assertEqual(format_float(float('nan')), 'nan')

    def test_round_trip(self):
        for value in (1 / 3, 2.5e-300, 1e22, -0.0):
            self.assertEqual(float(format_float(value, reproducible=True)), value)


class ConfigHashTests(SimpleTestCase):

    def test_key_order_does_not_matter(self):
        self.assertEqual(config_hash({'a': 1, 'b': [1, 2]}), config_hash({'b': [1, 2], 'a': 1}))
        self.assertNotEqual(config_hash({'a': 1}), config_hash({'a': 1.5}))
        self.assertEqual(len(config_hash({})), 64)


class NumericTests(SimpleTestCase):

    def test_log_binomial(self):
        values = np.exp(log_binomial(10, np.arange(11)))
        np.testing.assert_allclose(values, comb(10, np.arange(11)), rtol=1e-12)

    def test_golden_section_finds_interior_maximum(self):
        x, value = golden_section_max(lambda r: -(r - 0.3) ** 2, 0.0, 1.0)
        self.assertAlmostEqual(x, 0.3, places=6)
        self.assertAlmostEqual(value, 0.0, places=10)

    def test_golden_section_at_endpoint(self):
        x, _ = golden_section_max(lambda r: r, 0.0, 2.0, tolerance=1e-10)
        self.assertAlmostEqual(x, 2.0, places=8)


class SettingsTests(SimpleTestCase):

    @override_settings(AIRDROP_LAB={'THREADS': 3})
    def test_override_and_default(self):
        self.assertEqual(lab_setting('THREADS'), 3)
        self.assertEqual(lab_setting('EPSILON'), 1e-3)
        self.assertEqual(worker_count(), 3)

    @override_settings(AIRDROP_LAB={'THREADS': 1})
    def test_sequential_map(self):
        self.assertEqual(parallel_map(abs, [-3, 2, -1]), [3, 2, 1])

    @override_settings(AIRDROP_LAB={'THREADS': 2})
    def test_parallel_map_preserves_order(self):
        items = list(range(-20, 0))
        self.assertEqual(parallel_map(abs, items), [abs(i) for i in items])

# common/utils.py
# Utilitaires partagés : réglages, hachage de configuration, calcul numérique de base

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from scipy.special import gammaln

logger = logging.getLogger('airdrop_lab')

PHI_RATIO = (1 + math.sqrt(5)) / 2

LAB_DEFAULTS = {
    'THREADS': 1,
    'PROFILE_CAP': 2_000_000,
    'POTENTIAL_TOLERANCE': 1e-9,
    'DRAW_CHUNK': 4096,
    'MIXING_MAX_STEPS': 1_000_000,
    'GOLDEN_TOLERANCE': 1e-8,
    'PROFIT_GRID_POINTS': 10_000,
    'DEFAULT_BETA': 1.13,
    'HITTING_CAP': 10_000_000,
    'EPSILON': 1e-3,
}


def lab_setting(key):
    """
    Lit une valeur de settings.AIRDROP_LAB avec repli sur les valeurs par défaut.

    Les processus de calcul peuvent s'exécuter sans settings Django configurés.
    """
    try:
        overrides = getattr(settings, 'AIRDROP_LAB', {})
    except ImproperlyConfigured:
        overrides = {}
    return overrides.get(key, LAB_DEFAULTS[key])


def canonical_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def config_hash(payload):
    """Empreinte sha256 de la forme JSON canonique d'une configuration résolue."""
    return hashlib.sha256(canonical_json(payload).encode('utf-8')).hexdigest()


def format_float(value, reproducible=False):
    """
    Formate un flottant pour les sorties CSV.

    En mode reproductible, 17 chiffres significatifs ; sinon la représentation
    la plus courte qui se relit à l'identique.
    """
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if reproducible:
        return format(value, '.17g')
    return repr(value)


def log_binomial(n, k):
    """log C(n, k), vectorisé sur k."""
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def golden_section_max(func, lo, hi, tolerance=None):
    """
    Maximise une fonction unimodale sur [lo, hi] par section dorée.

    Returns:
        tuple: (argmax, valeur)
    """
    tolerance = tolerance or lab_setting('GOLDEN_TOLERANCE')
    a, b = float(lo), float(hi)
    c = b - (b - a) / PHI_RATIO
    d = a + (b - a) / PHI_RATIO
    fc, fd = func(c), func(d)
    while abs(b - a) > tolerance:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - (b - a) / PHI_RATIO
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) / PHI_RATIO
            fd = func(d)
    x = (a + b) / 2
    return x, func(x)


def worker_count():
    threads = int(lab_setting('THREADS') or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def parallel_map(func, items):
    """
    Applique func à chaque élément, en parallèle si plusieurs processus sont permis.

    L'ordre des résultats suit celui des éléments, quel que soit l'ordonnancement.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    try:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(func, items))
    except (OSError, RuntimeError) as e:
        logger.warning(f"Pool de processus indisponible ({e}), exécution séquentielle")
        return [func(item) for item in items]

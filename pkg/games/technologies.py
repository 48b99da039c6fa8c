# games/technologies.py
# Fonctions technologiques V : familles fermées, tables anonymes et fonctions générales

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from common.exceptions import InvalidConfigError, UnsupportedCombinationError

logger = logging.getLogger('airdrop_lab')

TECHNOLOGY_KINDS = ('threshold', 'linear', 'quadratic', 'sshaped', 'concave', 'table', 'general')

# Écart toléré entre une somme de contributions et l'entier le plus proche
LEVEL_SNAP = 1e-9


@dataclass(frozen=True)
class TechnologySpec:
    """Description déclarative d'une fonction technologique (kind + paramètres)."""
    kind: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        if self.kind == 'general':
            return {
                'kind': self.kind,
                'params': {'values': [[list(profile), value] for profile, value in sorted(self.params['values'].items())]},
            }
        return {'kind': self.kind, 'params': dict(self.params)}


def snap_level(ell):
    """Ramène une somme flottante à l'entier le plus proche lorsqu'elle en est à LEVEL_SNAP près."""
    nearest = round(ell)
    if abs(ell - nearest) <= LEVEL_SNAP:
        return int(nearest)
    return float(ell)


class Technology:
    """
    Évaluateur immuable d'une fonction technologique pour n joueurs.

    Les familles anonymes ne dépendent que du niveau de contribution ℓ = Σ a_i.
    """
    kind = None
    anonymous = True
    closed_form = True

    def __init__(self, n):
        self.n = int(n)

    def __setattr__(self, name, value):
        if getattr(self, '_frozen', False):
            raise AttributeError(f"Technologie immuable : impossible de modifier {name}")
        super().__setattr__(name, value)

    def _freeze(self):
        object.__setattr__(self, '_frozen', True)

    def _check_levels(self, ells):
        ells = np.asarray(ells, dtype=float)
        if np.any(ells < -LEVEL_SNAP) or np.any(ells > self.n + LEVEL_SNAP):
            raise InvalidConfigError(f"niveau de contribution hors de [0, {self.n}]", field='ell')
        return np.clip(ells, 0.0, float(self.n))

    def _values(self, ells):
        raise NotImplementedError

    def eval_anonymous(self, ell):
        """Valeur V(ℓ) pour un niveau de contribution ℓ (entier, ou réel pour les formes fermées)."""
        if not self.anonymous:
            raise UnsupportedCombinationError(
                "la technologie générale dépend du profil complet, pas seulement de ℓ", field='technology.kind'
            )
        return float(self._values(self._check_levels([ell]))[0])

    def eval_levels(self, ells):
        """Version vectorisée de eval_anonymous."""
        return self._values(self._check_levels(ells))

    def level_values(self):
        """Tableau V(0), …, V(n)."""
        return self.eval_levels(np.arange(self.n + 1))

    def eval_profile(self, profile):
        """
        Valeur V(a) d'un profil : V(Σ a_i) pour les familles anonymes.

        Les ensembles d'actions pouvant dépasser 1, ℓ n'est borné ici que par Σ_i max A_i,
        déjà garanti par la validation du profil ; seul un niveau négatif est rejeté.
        """
        return float(self.eval_profile_levels([snap_level(math.fsum(profile))])[0])

    def eval_profile_levels(self, ells):
        """Version vectorisée de eval_profile sur des sommes Σ a_i déjà calculées."""
        if not self.anonymous:
            raise UnsupportedCombinationError(
                "la technologie générale dépend du profil complet, pas seulement de ℓ", field='technology.kind'
            )
        ells = np.asarray(ells, dtype=float)
        if np.any(ells < -LEVEL_SNAP):
            raise InvalidConfigError("niveau de contribution négatif", field='ell')
        return self._values(np.maximum(ells, 0.0))

    def steepness(self, lo, hi):
        """
        Plus petit s tel que V(ℓ+1) − V(ℓ) ≤ s pour tout ℓ de [lo, hi−1].

        Un intervalle plat (s = 0) est celui où V ne progresse pas.
        """
        lo, hi = int(lo), int(hi)
        if not 0 <= lo <= hi <= self.n:
            raise InvalidConfigError(f"intervalle [{lo}, {hi}] invalide pour n={self.n}", field='interval')
        if lo == hi:
            return 0.0
        increments = np.diff(self.eval_levels(np.arange(lo, hi + 1)))
        return float(max(increments.max(), 0.0))

    def describe(self):
        raise NotImplementedError


class ThresholdTechnology(Technology):
    kind = 'threshold'

    def __init__(self, n, tau, v_low, v_high):
        super().__init__(n)
        self.tau = tau
        self.v_low = float(v_low)
        self.v_high = float(v_high)
        self._freeze()

    @property
    def delta_v(self):
        return self.v_high - self.v_low

    def _values(self, ells):
        return np.where(ells >= self.tau, self.v_high, self.v_low)

    def describe(self):
        return {'tau': self.tau, 'v_low': self.v_low, 'v_high': self.v_high}


class LinearTechnology(Technology):
    kind = 'linear'

    def __init__(self, n, lambda_v):
        super().__init__(n)
        self.lambda_v = float(lambda_v)
        self._freeze()

    def _values(self, ells):
        return self.lambda_v * ells

    def describe(self):
        return {'lambda_v': self.lambda_v}


class QuadraticTechnology(Technology):
    kind = 'quadratic'

    def __init__(self, n, tau):
        super().__init__(n)
        self.tau = float(tau)
        self._freeze()

    def _values(self, ells):
        return ells ** 2 / self.tau

    def describe(self):
        return {'tau': self.tau}


class SShapedTechnology(Technology):
    kind = 'sshaped'

    def __init__(self, n, tau, c):
        super().__init__(n)
        self.tau = float(tau)
        self.c = float(c)
        self._freeze()

    def _values(self, ells):
        # 0^c = 0 pour c > 0
        ratio = np.power(ells / self.tau, self.c)
        return ratio / (1.0 + ratio)

    def describe(self):
        return {'tau': self.tau, 'c': self.c}


class ConcaveTechnology(Technology):
    kind = 'concave'

    def __init__(self, n, tau, c):
        super().__init__(n)
        self.tau = float(tau)
        self.c = float(c)
        self._freeze()

    def _values(self, ells):
        return np.power(ells, self.c) / self.tau

    def describe(self):
        return {'tau': self.tau, 'c': self.c}


class TableTechnology(Technology):
    kind = 'table'
    closed_form = False

    def __init__(self, n, values):
        super().__init__(n)
        self.values = tuple(float(v) for v in values)
        self._array = np.array(self.values)
        self._array.setflags(write=False)
        self._freeze()

    def _values(self, ells):
        rounded = np.rint(ells)
        if np.any(np.abs(ells - rounded) > LEVEL_SNAP):
            raise UnsupportedCombinationError(
                "une technologie tabulée n'accepte que des niveaux entiers (actions binaires)",
                field='technology.kind',
            )
        if np.any(rounded > self.n):
            raise UnsupportedCombinationError(
                f"une technologie tabulée n'est définie que pour ℓ ≤ n = {self.n}", field='technology.kind'
            )
        return self._array[rounded.astype(int)]

    def describe(self):
        return {'values': list(self.values)}


class GeneralTechnology(Technology):
    """Fonction V définie profil par profil, réservée aux chemins par force brute."""
    kind = 'general'
    anonymous = False
    closed_form = False

    def __init__(self, n, values):
        super().__init__(n)
        self.values = dict(values)
        self._freeze()

    def eval_profile(self, profile):
        key = tuple(float(a) for a in profile)
        try:
            return self.values[key]
        except KeyError:
            raise InvalidConfigError(f"profil {key} absent de la table générale", field='technology.params.values')

    def eval_levels(self, ells):
        raise UnsupportedCombinationError(
            "la technologie générale dépend du profil complet, pas seulement de ℓ", field='technology.kind'
        )

    def level_values(self):
        return self.eval_levels(None)

    def steepness(self, lo, hi):
        return self.eval_levels(None)

    def describe(self):
        return {'values': [[list(profile), value] for profile, value in sorted(self.values.items())]}


def _require(condition, message, field_name):
    if not condition:
        raise InvalidConfigError(message, field=f'technology.params.{field_name}')


def _param(params, name, kind):
    if name not in params:
        raise InvalidConfigError(f"paramètre requis pour la technologie {kind}", field=f'technology.params.{name}')
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
        raise InvalidConfigError("nombre attendu", field=f'technology.params.{name}')
    if not math.isfinite(value):
        raise InvalidConfigError("valeur non finie", field=f'technology.params.{name}')
    return value


def make_technology(spec, n):
    """
    Construit et valide l'évaluateur correspondant à une TechnologySpec.

    Args:
        spec (TechnologySpec): Description déclarative
        n (int): Nombre de joueurs

    Returns:
        Technology: Évaluateur immuable

    Raises:
        InvalidConfigError: Paramètre manquant ou invariant violé (le champ est nommé)
    """
    if isinstance(spec, Technology):
        return spec
    if isinstance(spec, dict):
        spec = TechnologySpec(kind=spec.get('kind'), params=spec.get('params', {}))
    kind = spec.kind
    params = spec.params or {}

    if kind == 'threshold':
        tau = _param(params, 'tau', kind)
        v_low = _param(params, 'v_low', kind) if 'v_low' in params else 0.0
        v_high = _param(params, 'v_high', kind)
        _require(float(tau).is_integer(), "τ doit être un niveau entier", 'tau')
        _require(1 <= tau <= n, f"τ doit appartenir à [1, {n}]", 'tau')
        _require(v_low >= 0, "V_low doit être positif ou nul", 'v_low')
        _require(v_high > v_low, "V_high doit être strictement supérieur à V_low", 'v_high')
        return ThresholdTechnology(n, int(tau), v_low, v_high)

    if kind == 'linear':
        lambda_v = _param(params, 'lambda_v', kind)
        _require(lambda_v > 0, "λ_V doit être strictement positif", 'lambda_v')
        return LinearTechnology(n, lambda_v)

    if kind == 'quadratic':
        tau = _param(params, 'tau', kind)
        _require(tau > 0, "τ doit être strictement positif", 'tau')
        return QuadraticTechnology(n, tau)

    if kind == 'sshaped':
        tau = _param(params, 'tau', kind)
        c = _param(params, 'c', kind)
        _require(tau > 0, "τ doit être strictement positif", 'tau')
        _require(c > 0, "c doit être strictement positif", 'c')
        return SShapedTechnology(n, tau, c)

    if kind == 'concave':
        tau = _param(params, 'tau', kind)
        c = _param(params, 'c', kind)
        _require(tau > 0, "τ doit être strictement positif", 'tau')
        _require(0 < c < 1, "c doit appartenir à ]0, 1[", 'c')
        return ConcaveTechnology(n, tau, c)

    if kind == 'table':
        values = params.get('values')
        _require(isinstance(values, (list, tuple)), "liste de valeurs attendue", 'values')
        _require(len(values) == n + 1, f"la table doit contenir n+1 = {n + 1} valeurs", 'values')
        values = [float(v) for v in values]
        _require(all(math.isfinite(v) for v in values), "valeurs non finies", 'values')
        _require(all(b >= a for a, b in zip(values, values[1:])), "la table doit être croissante (au sens large)", 'values')
        return TableTechnology(n, values)

    if kind == 'general':
        values = params.get('values')
        _require(isinstance(values, dict) and values, "correspondance profil → valeur attendue", 'values')
        mapping = {}
        for profile, value in values.items():
            key = tuple(float(a) for a in profile)
            _require(len(key) == n, f"profil {key} de longueur différente de n={n}", 'values')
            _require(math.isfinite(float(value)), f"valeur non finie pour le profil {key}", 'values')
            mapping[key] = float(value)
        return GeneralTechnology(n, mapping)

    raise InvalidConfigError(f"type de technologie inconnu : {kind}", field='technology.kind')

# equilibria/services/equilibrium_service.py
# Équilibres de Nash purs et états de potentiel maximal (stabilité stochastique)

import logging
import math
from dataclasses import replace

import numpy as np

from common.exceptions import UnsupportedCombinationError
from common.utils import lab_setting
from games.domain import ContributionLevel, Profile
from games.services.game_service import GameService
from ..reports import Deviation, EquilibriumReport, LevelClass, NashCheck

logger = logging.getLogger('airdrop_lab')

# Tolérance relative sur les comparaisons d'utilités
UTILITY_TIE = 1e-12


def _tie(*terms):
    return UTILITY_TIE * max(1.0, *(abs(t) for t in terms))


class EquilibriumService:
    """
    Vérification et énumération des équilibres de Nash purs.

    Le jeu étant de potentiel exact, les maximiseurs du potentiel sont des
    équilibres et forment le support de la loi limite de la dynamique logit.
    """

    @classmethod
    def is_pure_nash(cls, config, profile):
        """
        Test direct : aucun joueur ne gagne strictement à dévier seul.

        Returns:
            NashCheck: Verdict et, le cas échéant, la déviation la plus profitable
                       du premier joueur concerné
        """
        profile = Profile.of(config, profile)
        a = profile.a
        rate = config.reward_rate
        value = config.technology.eval_profile(a)
        for i, action_set in enumerate(config.actions):
            best = None
            for x in action_set:
                if x == a[i]:
                    continue
                deviation = a[:i] + (x,) + a[i + 1:]
                value_gain = rate * (config.technology.eval_profile(deviation) - value)
                cost_gain = config.costs[i] * (x - a[i])
                gain = value_gain - cost_gain
                if gain > _tie(value_gain, cost_gain) and (best is None or gain > best.gain):
                    best = Deviation(player=i, from_action=a[i], to_action=x, gain=gain)
            if best is not None:
                return NashCheck(is_equilibrium=False, deviation=best)
        return NashCheck(is_equilibrium=True)

    @classmethod
    def equilibrium_conditions(cls, config, profile):
        """
        Caractérisation par les deux conditions d'équilibre.

        1. Pour tout a_i⁺ > a_i : V inchangée ou ρ/n ≤ c_i(a_i⁺ − a_i)/(V(a⁺) − V(a)).
        2. Pour tout a_i⁻ < a_i : V décroît strictement et ρ/n ≥ c_i(a_i − a_i⁻)/(V(a) − V(a⁻)).

        Coïncide avec is_pure_nash dès que les coûts sont strictement positifs.
        """
        profile = Profile.of(config, profile)
        a = profile.a
        rate = config.reward_rate
        value = config.technology.eval_profile(a)
        for i, action_set in enumerate(config.actions):
            c = config.costs[i]
            for x in action_set:
                deviation = a[:i] + (x,) + a[i + 1:]
                other = config.technology.eval_profile(deviation)
                if x > a[i]:
                    rise = other - value
                    if rise > 0 and rate * rise > c * (x - a[i]) + _tie(rate * rise, c * (x - a[i])):
                        return NashCheck(False, Deviation(i, a[i], x, rate * rise - c * (x - a[i])))
                elif x < a[i]:
                    drop = value - other
                    saved = c * (a[i] - x)
                    if not (drop > 0 and rate * drop >= saved - _tie(rate * drop, saved)):
                        return NashCheck(False, Deviation(i, a[i], x, saved - rate * drop))
        return NashCheck(True)

    @staticmethod
    def _resolve_method(config, method):
        fast_ok = config.is_anonymous and config.is_binary
        if method == 'auto':
            return 'anonymous' if fast_ok else 'brute-force'
        if method == 'anonymous' and not fast_ok:
            raise UnsupportedCombinationError(
                "le chemin rapide exige une technologie anonyme et des actions binaires", field='technology.kind'
            )
        if method not in ('anonymous', 'brute-force'):
            raise UnsupportedCombinationError(f"méthode d'énumération inconnue : {method}")
        return method

    @staticmethod
    def _sorted_costs(config):
        return np.sort(np.asarray(config.costs, dtype=float))

    @classmethod
    def level_equilibria(cls, config):
        """
        Chemin rapide (technologie anonyme, actions binaires) : parcourt ℓ ∈ [0, n].

        Pour chaque niveau, compte exactement les ensembles de contributeurs
        satisfaisant les deux conditions ; le témoin est formé des ℓ joueurs
        les moins coûteux.

        Returns:
            tuple: LevelClass des niveaux d'équilibre
        """
        n = config.n
        values = config.technology.level_values()
        rate = config.reward_rate
        costs = np.asarray(config.costs, dtype=float)
        levels = []
        for ell in range(n + 1):
            if ell > 0:
                stay_reward = rate * (values[ell] - values[ell - 1])
                # Un coût nul laisse le contributeur indifférent : il reste en équilibre
                in_ok = stay_reward >= costs - UTILITY_TIE * np.maximum(1.0, np.maximum(abs(stay_reward), costs))
            else:
                in_ok = np.zeros(n, dtype=bool)
            if ell < n:
                rise = values[ell + 1] - values[ell]
                join_reward = rate * rise
                out_ok = (rise == 0) | (join_reward <= costs + UTILITY_TIE * np.maximum(1.0, np.maximum(abs(join_reward), costs)))
            else:
                out_ok = np.zeros(n, dtype=bool)
            if ell == 0:
                count = 1 if out_ok.all() else 0
            elif ell == n:
                count = 1 if in_ok.all() else 0
            else:
                if np.any(~in_ok & ~out_ok):
                    count = 0
                else:
                    must_in = int(np.sum(in_ok & ~out_ok))
                    free = int(np.sum(in_ok & out_ok))
                    k = ell - must_in
                    count = math.comb(free, k) if 0 <= k <= free else 0
            if count:
                witness = ContributionLevel(ell=ell, n=n).cheapest_profile(config.costs).a
                levels.append(LevelClass(ell=ell, count=count, witness=witness))
        return tuple(levels)

    @classmethod
    def level_potential_maximizers(cls, config):
        """
        Maximiseurs du potentiel par niveaux : à ℓ fixé, φ est maximal pour les
        sous-ensembles de coût total minimal (les ℓ coûts les plus faibles).

        Returns:
            tuple: (LevelClass des niveaux de potentiel maximal, valeur maximale)
        """
        n = config.n
        values = config.technology.level_values()
        sorted_costs = cls._sorted_costs(config)
        prefix = np.concatenate(([0.0], np.cumsum(sorted_costs)))
        best = config.reward_rate * values - prefix
        maximum = float(best.max())
        tolerance = lab_setting('POTENTIAL_TOLERANCE')
        levels = []
        for ell in range(n + 1):
            if best[ell] < maximum - tolerance:
                continue
            if ell == 0:
                count = 1
            else:
                pivot = sorted_costs[ell - 1]
                below = int(np.sum(sorted_costs < pivot))
                tied = int(np.sum(sorted_costs == pivot))
                count = math.comb(tied, ell - below)
            witness = ContributionLevel(ell=ell, n=n).cheapest_profile(config.costs).a
            levels.append(LevelClass(ell=ell, count=count, witness=witness))
        return tuple(levels), maximum

    @classmethod
    def brute_force_equilibria(cls, config):
        """
        Énumère tous les profils et applique le test de déviation à chaque joueur.

        Returns:
            tuple: Profils d'équilibre dans l'ordre lexicographique
        """
        grids = GameService.profile_grid(config)
        values = GameService.value_grid(config, grids)
        rate = config.reward_rate
        stable = np.ones(values.shape, dtype=bool)
        for i in range(config.n):
            utilities = rate * values - config.costs[i] * grids[i]
            best = utilities.max(axis=i, keepdims=True)
            slack = UTILITY_TIE * np.maximum(1.0, np.maximum(np.abs(utilities), np.abs(best)))
            stable &= utilities >= best - slack
        return cls._profiles_from_mask(config, stable)

    @classmethod
    def brute_force_potential_maximizers(cls, config):
        grids = GameService.profile_grid(config)
        potential = GameService.potential_grid(config, grids)
        maximum = float(potential.max())
        mask = potential >= maximum - lab_setting('POTENTIAL_TOLERANCE')
        return cls._profiles_from_mask(config, mask), maximum

    @staticmethod
    def _profiles_from_mask(config, mask):
        return tuple(
            tuple(config.actions[i][k] for i, k in enumerate(index))
            for index in map(tuple, np.argwhere(mask))
        )

    @classmethod
    def enumerate_pne(cls, config, method='auto'):
        """
        Ensemble des équilibres de Nash purs.

        Args:
            method (str): 'auto', 'anonymous' (chemin rapide) ou 'brute-force'

        Returns:
            EquilibriumReport: Champ pne (ou pne_levels pour le chemin rapide)

        Raises:
            ResourceLimitError: Espace de profils au-delà du plafond (force brute)
        """
        method = cls._resolve_method(config, method)
        if method == 'anonymous':
            levels = cls.level_equilibria(config)
            logger.info(f"Équilibres par niveaux (n={config.n}) : {[level.ell for level in levels]}")
            return EquilibriumReport(method=method, pne_levels=levels)
        profiles = cls.brute_force_equilibria(config)
        logger.info(f"Équilibres par force brute : {len(profiles)} profils sur {config.profile_count}")
        return EquilibriumReport(method=method, pne=profiles)

    @classmethod
    def potential_maximizers(cls, config, method='auto'):
        """
        États de potentiel maximal et loi limite uniforme sur ces états quand β → ∞.

        Les égalités de potentiel sont conservées à POTENTIAL_TOLERANCE près.
        """
        method = cls._resolve_method(config, method)
        if method == 'anonymous':
            levels, maximum = cls.level_potential_maximizers(config)
            total = sum(level.count for level in levels)
            distribution = {level.ell: level.count / total for level in levels}
            return EquilibriumReport(method=method, potmax_levels=levels,
                                     limit_distribution=distribution, max_potential=maximum)
        profiles, maximum = cls.brute_force_potential_maximizers(config)
        distribution = {profile: 1.0 / len(profiles) for profile in profiles}
        return EquilibriumReport(method=method, potmax=profiles,
                                 limit_distribution=distribution, max_potential=maximum)

    @classmethod
    def analyze(cls, config, method='auto'):
        """Rapport complet : équilibres, maximiseurs du potentiel et loi limite."""
        equilibria = cls.enumerate_pne(config, method)
        maximizers = cls.potential_maximizers(config, equilibria.method)
        report = EquilibriumReport(
            method=equilibria.method,
            pne=equilibria.pne,
            pne_levels=equilibria.pne_levels,
            potmax=maximizers.potmax,
            potmax_levels=maximizers.potmax_levels,
            limit_distribution=maximizers.limit_distribution,
            max_potential=maximizers.max_potential,
        )
        if report.method == 'anonymous':
            pne_counts = report.level_counts('pne')
            outside = [ell for ell, count in report.level_counts('potmax').items() if pne_counts.get(ell, 0) < count]
        else:
            outside = sorted(set(report.potmax) - set(report.pne))
        if outside:
            logger.error(f"Maximiseurs du potentiel hors des équilibres ({report.method}) : {outside}")
            report = replace(report, consistent=False)
        return report

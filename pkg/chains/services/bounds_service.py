# chains/services/bounds_service.py
# Bornes analytiques des temps d'atteinte et de mélange

import logging
import math

import numpy as np

from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from common.utils import log_binomial
from games.technologies import LinearTechnology, ThresholdTechnology
from .birth_death_service import BirthDeathService
from ..records import HittingLowerBound, MixingLowerBound

logger = logging.getLogger('airdrop_lab')

# Au-delà, exp() déborde en double précision
LOG_OVERFLOW = 709.0


def _exp(log_value):
    if log_value > LOG_OVERFLOW:
        return math.inf
    return math.exp(log_value)


class BoundsService:
    """Évaluation, en espace logarithmique, des bornes inférieures et supérieures."""

    @staticmethod
    def _check_interval(config, interval, target):
        try:
            low, high = (int(v) for v in interval)
        except (TypeError, ValueError):
            raise InvalidConfigError("intervalle [ℓ1, ℓ2] attendu", field='experiment.interval')
        if not 0 <= low < high <= target <= config.n:
            raise InvalidConfigError(
                f"intervalle [{low}, {high}] incompatible avec la cible {target} (n={config.n})",
                field='experiment.interval',
            )
        return low, high

    @classmethod
    def drift_bound(cls, config, interval, target):
        """
        T ≥ (1/d_I)^{ℓ2−ℓ1}, d_I étant la plus grande dérive sur [ℓ1, ℓ2−1].
        """
        low, high = cls._check_interval(config, interval, target)
        log_weights = BirthDeathService.log_weights(config)
        log_drifts = np.diff(log_weights)[low:high]
        return _exp(-(high - low) * float(log_drifts.max()))

    @classmethod
    def steep_bound(cls, config, interval, target):
        """
        Forme s-raide : T ≥ (exp(−β((ρ/n)s − α))·(ℓ1+1)/(n−ℓ1))^{ℓ2−ℓ1}.
        """
        alpha = BirthDeathService.require_lumpable(config)
        low, high = cls._check_interval(config, interval, target)
        s = config.technology.steepness(low, high)
        log_base = (-config.beta * (config.reward_rate * s - alpha)
                    + math.log(low + 1) - math.log(config.n - low))
        return _exp((high - low) * log_base)

    @staticmethod
    def _threshold_log_base(config, ell):
        alpha = BirthDeathService.require_lumpable(config)
        technology = config.technology
        if not isinstance(technology, ThresholdTechnology):
            raise UnsupportedCombinationError("technologie à seuil requise", field='technology.kind')
        if not 0 <= ell < technology.tau:
            raise InvalidConfigError(f"ℓ doit appartenir à [0, {technology.tau - 1}]", field='ell')
        return alpha * config.beta + math.log(ell + 1) - math.log(config.n - ell)

    @classmethod
    def threshold_bound(cls, config, ell):
        """
        (e^{αβ}(ℓ+1)/(n−ℓ))^{τ−1−ℓ} pour 0 ≤ ℓ < τ.

        Seuls les pas ℓ → τ−1 sont plats ; le pas τ−1 → τ est exclu de l'exposant.
        """
        log_base = cls._threshold_log_base(config, ell)
        return _exp((config.technology.tau - 1 - ell) * log_base)

    @classmethod
    def threshold_stated_bound(cls, config, ell):
        """
        Forme (e^{αβ}(ℓ+1)/(n−ℓ))^{τ−ℓ}, rapportée à titre de comparaison.

        Elle compte le pas τ−1 → τ comme plat et peut dépasser le temps exact.
        """
        log_base = cls._threshold_log_base(config, ell)
        return _exp((config.technology.tau - ell) * log_base)

    @classmethod
    def threshold_bounds(cls, config):
        """Bornes pour chaque ℓ ∈ [0, τ−1], dans l'ordre des niveaux."""
        return [cls.threshold_bound(config, ell) for ell in range(config.technology.tau)]

    @staticmethod
    def ell_star_bound(config):
        """
        (1 + 1/ℓ*)^{τ−ℓ*−1}, avec l'exposant réel tel quel.

        Returns:
            float ou None si τ−1 ≤ ℓ*
        """
        technology = config.technology
        if not isinstance(technology, ThresholdTechnology):
            raise UnsupportedCombinationError("technologie à seuil requise", field='technology.kind')
        ell_star = BirthDeathService.ell_star(config)
        exponent = technology.tau - ell_star - 1
        if exponent <= 0 or ell_star <= 0:
            return None
        return _exp(exponent * math.log1p(1.0 / ell_star))

    @classmethod
    def linear_bound(cls, config, ell1, target):
        """Technologie linéaire : T ≥ (e^{−Γβ}(ℓ1+1)/(n−ℓ1))^{ℓ−ℓ1−1}."""
        alpha = BirthDeathService.require_lumpable(config)
        if not isinstance(config.technology, LinearTechnology):
            raise UnsupportedCombinationError("technologie linéaire requise", field='technology.kind')
        if not 0 <= ell1 < target <= config.n:
            raise InvalidConfigError(f"ℓ1={ell1} incompatible avec la cible {target}", field='experiment.interval')
        gamma = config.reward_rate * config.technology.lambda_v - alpha
        log_base = -gamma * config.beta + math.log(ell1 + 1) - math.log(config.n - ell1)
        return _exp((target - ell1 - 1) * log_base)

    @classmethod
    def hitting_lower_bound(cls, config, interval, target):
        """
        Toutes les bornes inférieures applicables pour atteindre target depuis 0.

        Args:
            config (GameConfig): Jeu anonyme binaire à coût uniforme
            interval (tuple): [ℓ1, ℓ2] avec ℓ2 ≤ target
            target (int): Niveau visé

        Returns:
            HittingLowerBound: Chaque forme, la meilleure étant exposée par best
        """
        low, high = cls._check_interval(config, interval, target)
        forms = {
            'drift_form': cls.drift_bound(config, (low, high), target),
            'steep_form': cls.steep_bound(config, (low, high), target),
        }
        technology = config.technology
        if isinstance(technology, ThresholdTechnology) and target >= technology.tau:
            if low < technology.tau:
                forms['threshold_form'] = cls.threshold_bound(config, low)
                forms['threshold_stated_form'] = cls.threshold_stated_bound(config, low)
                logger.info(
                    f"Borne à seuil (ℓ={low}) : exposant τ−1−ℓ {forms['threshold_form']:.6g}, "
                    f"exposant τ−ℓ {forms['threshold_stated_form']:.6g} (la première fait foi)"
                )
            forms['threshold_best'] = max(cls.threshold_bounds(config))
            forms['ell_star_form'] = cls.ell_star_bound(config)
        if isinstance(technology, LinearTechnology):
            forms['linear_form'] = cls.linear_bound(config, low, target)
        return HittingLowerBound(interval=(low, high), target=target, **forms)

    @staticmethod
    def hitting_upper_bound_ell_star(config):
        """(ℓ*+1)·n²/(n−ℓ*) : majorant du temps pour atteindre ⌈ℓ*⌉."""
        ell_star = BirthDeathService.ell_star(config)
        return (ell_star + 1) * config.n ** 2 / (config.n - ell_star)

    @staticmethod
    def mixing_lower_bound_threshold(config):
        """
        Minorant du temps de mélange pour le seuil, lorsque p_high(ρ) > 1/2.

        La forme dérivée, exp(αβ(τ−1))/C(n,τ−1), fait foi ; la forme
        réduite, exp(αβ)·e^{τ−1}/C(n,τ−1), est rapportée à titre de comparaison.
        """
        alpha = BirthDeathService.require_lumpable(config)
        success = BirthDeathService.success_probability(config)
        if success.p_high <= 0.5:
            return MixingLowerBound(applicable=False, p_high=success.p_high)
        tau = config.technology.tau
        log_binom = float(log_binomial(config.n, tau - 1))
        log_derived = alpha * config.beta * (tau - 1) - log_binom
        log_reduced = alpha * config.beta + (tau - 1) - log_binom
        if not math.isclose(log_derived, log_reduced, rel_tol=1e-12, abs_tol=1e-12):
            logger.warning(
                f"Borne de mélange : forme dérivée {_exp(log_derived):.6g} "
                f"≠ forme réduite {_exp(log_reduced):.6g} (la forme dérivée fait foi)"
            )
        return MixingLowerBound(
            applicable=True,
            p_high=success.p_high,
            derived_form=_exp(log_derived),
            reduced_form=_exp(log_reduced),
            log_derived_form=log_derived,
            log_reduced_form=log_reduced,
        )

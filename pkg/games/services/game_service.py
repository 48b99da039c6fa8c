# games/services/game_service.py
# Algèbre exacte du jeu : valeur du token, récompenses, utilités, potentiel, bien-être, profit

import logging
import math

import numpy as np

from common.exceptions import InvalidConfigError, ResourceLimitError
from common.utils import lab_setting
from ..domain import Metrics, Profile
from ..technologies import LEVEL_SNAP

logger = logging.getLogger('airdrop_lab')


class GameService:
    """
    Service regroupant les équations du modèle.

    Les utilités passent toujours par la forme (ρ/n)·V(a) : T_tot n'intervient
    que dans les quantités libellées en tokens.
    """

    @staticmethod
    def token_value(v, t_tot):
        """
        Valeur (prix) d'un token : t(a) = V(a) / T_tot.

        Raises:
            InvalidConfigError: Si T_tot ≤ 0
        """
        if t_tot <= 0:
            raise InvalidConfigError("T_tot doit être strictement positif", field='t_tot')
        return v / t_tot

    @staticmethod
    def per_player_tokens(rho, t_tot, n):
        """
        Tokens reçus par chaque joueur : γ = ρ·T_tot/n (γ peut être fractionnaire).

        Raises:
            InvalidConfigError: Si ρ hors de [0, 1]
        """
        if not 0.0 <= rho <= 1.0:
            raise InvalidConfigError("ρ doit appartenir à [0, 1]", field='rho')
        if t_tot <= 0:
            raise InvalidConfigError("T_tot doit être strictement positif", field='t_tot')
        return rho * t_tot / n

    @staticmethod
    def system_value(config, profile):
        profile = Profile.of(config, profile)
        return float(config.technology.eval_profile(profile.a))

    @classmethod
    def social_cost(cls, config, profile):
        profile = Profile.of(config, profile)
        return math.fsum(c * a for c, a in zip(config.costs, profile.a))

    @classmethod
    def utility(cls, config, profile, i):
        """
        Utilité du joueur i : u_i(a) = (ρ/n)·V(a) − c_i·a_i.

        Raises:
            InvalidConfigError: Indice de joueur hors de [0, n)
        """
        if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 0 <= i < config.n:
            raise InvalidConfigError(f"indice de joueur {i} hors de [0, {config.n})", field='player')
        profile = Profile.of(config, profile)
        return config.reward_rate * cls.system_value(config, profile) - config.costs[i] * profile.a[i]

    @classmethod
    def potential(cls, config, profile):
        """Potentiel exact φ(a) = (ρ/n)·V(a) − SC(a)."""
        profile = Profile.of(config, profile)
        return config.reward_rate * cls.system_value(config, profile) - cls.social_cost(config, profile)

    @classmethod
    def users_welfare(cls, config, profile):
        """UW = Σ u_i(a) = ρ·V(a) − SC(a)."""
        profile = Profile.of(config, profile)
        return config.rho * cls.system_value(config, profile) - cls.social_cost(config, profile)

    @classmethod
    def designer_profit(cls, config, profile):
        """Profit du concepteur : (1 − ρ)·V(a) − d_V."""
        return (1.0 - config.rho) * cls.system_value(config, profile) - config.d_v

    @classmethod
    def metrics(cls, config, profile):
        """
        Calcule les cinq métriques d'un profil.

        Returns:
            Metrics: valeur du système, valeur du token, coût social, bien-être, profit
        """
        profile = Profile.of(config, profile)
        value = cls.system_value(config, profile)
        social_cost = cls.social_cost(config, profile)
        return Metrics(
            system_value=value,
            token_value=cls.token_value(value, config.t_tot),
            social_cost=social_cost,
            users_welfare=config.rho * value - social_cost,
            designer_profit=(1.0 - config.rho) * value - config.d_v,
        )

    @staticmethod
    def profile_grid(config):
        """
        Énumère tous les profils sous forme de grille numpy.

        Returns:
            tuple: (grilles d'actions par joueur de forme Π|A_i|, forme de la grille)

        Raises:
            ResourceLimitError: Si Π|A_i| dépasse le plafond configuré
        """
        cap = lab_setting('PROFILE_CAP')
        if config.profile_count > cap:
            raise ResourceLimitError(
                f"{config.profile_count} profils dépassent le plafond de {cap} ; "
                f"utilisez une technologie anonyme avec actions binaires (chemin rapide)",
                field='actions',
            )
        axes = [np.asarray(action_set, dtype=float) for action_set in config.actions]
        return np.meshgrid(*axes, indexing='ij')

    @classmethod
    def value_grid(cls, config, grids=None):
        """V(a) sur tout l'espace de profils (ordre lexicographique des indices d'actions)."""
        grids = grids if grids is not None else cls.profile_grid(config)
        technology = config.technology
        if technology.anonymous:
            levels = np.sum(grids, axis=0)
            rounded = np.rint(levels)
            levels = np.where(np.abs(levels - rounded) <= LEVEL_SNAP, rounded, levels)
            return technology.eval_profile_levels(levels.ravel()).reshape(levels.shape)
        values = np.empty(grids[0].shape)
        for index in np.ndindex(values.shape):
            values[index] = technology.eval_profile(tuple(g[index] for g in grids))
        return values

    @classmethod
    def potential_grid(cls, config, grids=None):
        """φ(a) sur tout l'espace de profils."""
        grids = grids if grids is not None else cls.profile_grid(config)
        values = cls.value_grid(config, grids)
        social_cost = sum(c * g for c, g in zip(config.costs, grids))
        return config.reward_rate * values - social_cost

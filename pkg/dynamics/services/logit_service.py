# dynamics/services/logit_service.py
# Réponse logit, noyau de transition exact et mesure de Gibbs sur les profils

import logging

import numpy as np
from scipy.special import expit, logsumexp, softmax

from common.exceptions import ResourceLimitError, UnsupportedCombinationError
from common.utils import lab_setting
from games.domain import Profile
from games.services.game_service import GameService

logger = logging.getLogger('airdrop_lab')

# Au-delà, le noyau dense sur les profils n'est plus construit
KERNEL_STATE_CAP = 1024


class LogitService:
    """
    Règle de réponse logit p_i(x | a_{-i}) ∝ exp(β·u_i(x, a_{-i})).
    """

    @staticmethod
    def utilities(config, profile, i):
        """Utilités u_i(x, a_{-i}) pour chaque x de A_i."""
        profile = Profile.of(config, profile)
        utilities = []
        for x in config.actions[i]:
            candidate = profile.a[:i] + (x,) + profile.a[i + 1:]
            utilities.append(GameService.utility(config, candidate, i))
        return np.array(utilities)

    @classmethod
    def logit_response(cls, config, profile, i):
        """
        Distribution de la nouvelle action du joueur i.

        Pour deux actions, p(0) = σ(−β·(u(1) − u(0))) ; au-delà, softmax de β·u
        (soustraction du maximum comprise).
        """
        utilities = cls.utilities(config, profile, i)
        if utilities.size == 2:
            gain = utilities[1] - utilities[0]
            return np.array([expit(-config.beta * gain), expit(config.beta * gain)])
        return softmax(config.beta * utilities)

    @staticmethod
    def zero_probability_table(config):
        """
        Table p(0 | ℓ_{-i}) par classe de coût pour les jeux anonymes binaires.

        Returns:
            tuple: (table de forme (classes, n), classe de coût de chaque joueur)
        """
        if not (config.is_anonymous and config.is_binary):
            raise UnsupportedCombinationError("table logit réservée aux jeux anonymes binaires", field='technology.kind')
        classes, player_class = np.unique(np.asarray(config.costs), return_inverse=True)
        shared = config.reward_rate * config.technology.level_values()
        gains = (shared[1:][None, :] - classes[:, None] * 1.0) - (shared[:-1][None, :] - classes[:, None] * 0.0)
        return expit(-config.beta * gains), player_class

    @staticmethod
    def _state_space(config):
        if config.profile_count > KERNEL_STATE_CAP:
            raise ResourceLimitError(
                f"{config.profile_count} profils : noyau dense limité à {KERNEL_STATE_CAP} états",
                field='n',
            )
        grids = GameService.profile_grid(config)
        return grids, grids[0].shape

    @classmethod
    def transition_kernel(cls, config):
        """
        Noyau exact de la dynamique sur l'espace des profils (ordre lexicographique).

        Le potentiel étant exact, la réponse de i ne dépend que de φ le long de l'axe i.
        """
        grids, shape = cls._state_space(config)
        scaled = config.beta * GameService.potential_grid(config, grids)
        size = scaled.size
        kernel = np.zeros((size, size))
        sources = np.arange(size)
        index = np.indices(shape)
        for i in range(config.n):
            response = softmax(scaled, axis=i)
            for k in range(shape[i]):
                target_index = index.copy()
                target_index[i] = k
                targets = np.ravel_multi_index(tuple(target_index), shape).ravel()
                weight = np.broadcast_to(np.take(response, [k], axis=i), shape).ravel()
                np.add.at(kernel, (sources, targets), weight / config.n)
        return kernel

    @classmethod
    def gibbs_measure(cls, config):
        """π(a) ∝ exp(β·φ(a)) sur les profils aplatis."""
        grids, _ = cls._state_space(config)
        scaled = config.beta * GameService.potential_grid(config, grids)
        return np.exp(scaled - logsumexp(scaled)).ravel()

    @classmethod
    def level_of_states(cls, config):
        grids, _ = cls._state_space(config)
        return np.sum(grids, axis=0).ravel()

    @classmethod
    def lump_by_level(cls, config, measure):
        """Agrège une mesure sur les profils binaires par niveau ℓ."""
        levels = np.rint(cls.level_of_states(config)).astype(int)
        return np.bincount(levels, weights=measure, minlength=config.n + 1)

    @classmethod
    def stationary_by_power_iteration(cls, config, tolerance=1e-12, max_iterations=None):
        """
        Itère μ ← μP depuis la loi uniforme jusqu'à ‖μP − μ‖₁ ≤ tolerance.

        Raises:
            ResourceLimitError: Sans convergence après max_iterations
        """
        kernel = cls.transition_kernel(config)
        max_iterations = max_iterations or lab_setting('MIXING_MAX_STEPS')
        measure = np.full(kernel.shape[0], 1.0 / kernel.shape[0])
        for iteration in range(1, max_iterations + 1):
            updated = measure @ kernel
            change = np.abs(updated - measure).sum()
            measure = updated
            if change <= tolerance:
                logger.debug(f"Itération de puissance convergée en {iteration} pas")
                return measure / measure.sum()
        raise ResourceLimitError(f"itération de puissance non convergée en {max_iterations} pas", field='experiment.cap')

# chains/services/birth_death_service.py
# Chaîne agrégée exacte des jeux anonymes binaires à coût uniforme

import logging
import math

import numpy as np
from scipy.linalg import solve_banded
from scipy.special import expit, log_expit, logsumexp

from common.exceptions import InvalidConfigError, ResourceLimitError, UnsupportedCombinationError
from common.utils import lab_setting, log_binomial
from games.services.game_service import GameService
from games.technologies import LinearTechnology, ThresholdTechnology
from ..records import (
    BirthDeathChain, CutoffReport, HittingTime, StationaryLaw, SuccessProbability,
)

logger = logging.getLogger('airdrop_lab')

MIXING_LOWER_FACTOR = 1.0 / 24.0
MIXING_UPPER_FACTOR = 288.0


class BirthDeathService:
    """
    Analyse exacte de la chaîne ℓ ∈ [0, n] obtenue en agrégeant la dynamique logit.

    Poids, binomiaux et constantes de normalisation restent en espace logarithmique.
    """

    @staticmethod
    def require_lumpable(config):
        """
        Raises:
            UnsupportedCombinationError: Technologie non anonyme, actions non binaires
                                         ou coûts hétérogènes
        """
        if not config.is_anonymous:
            raise UnsupportedCombinationError("technologie anonyme requise pour la chaîne agrégée", field='technology.kind')
        if not config.is_binary:
            raise UnsupportedCombinationError("actions binaires requises pour la chaîne agrégée", field='actions')
        if config.uniform_cost is None:
            raise UnsupportedCombinationError("coûts uniformes requis pour la chaîne agrégée", field='costs')
        return config.uniform_cost

    @classmethod
    def log_weights(cls, config):
        """logw(ℓ) = log C(n,ℓ) − αβℓ + β(ρ/n)(V(ℓ) − V(0))."""
        alpha = cls.require_lumpable(config)
        levels = np.arange(config.n + 1)
        values = config.technology.level_values()
        return (log_binomial(config.n, levels) - alpha * config.beta * levels
                + config.beta * config.reward_rate * (values - values[0]))

    @classmethod
    def build_chain(cls, config):
        """
        Construit p(ℓ), q(ℓ) à partir de l'écart d'utilité (ρ/n)(V(ℓ+1) − V(ℓ)) − α.

        p(ℓ) = ((n−ℓ)/n)·σ(β·écart(ℓ)), q(ℓ) = (ℓ/n)·σ(−β·écart(ℓ−1)).

        Returns:
            BirthDeathChain
        """
        alpha = cls.require_lumpable(config)
        n = config.n
        values = config.technology.level_values()
        gaps = config.reward_rate * np.diff(values) - alpha
        scaled = config.beta * gaps
        levels = np.arange(n + 1, dtype=float)

        log_up = np.full(n + 1, -np.inf)
        log_up[:n] = np.log((n - levels[:n]) / n) + log_expit(scaled)
        log_down = np.full(n + 1, -np.inf)
        log_down[1:] = np.log(levels[1:] / n) + log_expit(-scaled)

        up = np.exp(log_up)
        down = np.exp(log_down)
        hold = np.clip(1.0 - up - down, 0.0, 1.0)

        log_weights = cls.log_weights(config)
        return BirthDeathChain(
            n=n, up=up, down=down, hold=hold, log_up=log_up, log_down=log_down,
            log_weights=log_weights, log_z=float(logsumexp(log_weights)),
        )

    @classmethod
    def stationary(cls, config):
        """
        Loi stationnaire π̂ sur les niveaux, normalisée par log-sum-exp.

        Returns:
            StationaryLaw: log-probabilités, niveau moyen, valeur espérée, p_high (seuil)
        """
        log_weights = cls.log_weights(config)
        log_probs = log_weights - logsumexp(log_weights)
        probs = np.exp(log_probs)
        values = config.technology.level_values()
        levels = np.arange(config.n + 1)
        tau = p_high = None
        if isinstance(config.technology, ThresholdTechnology):
            tau = config.technology.tau
            p_high = float(np.exp(logsumexp(log_probs[tau:])))
        return StationaryLaw(
            n=config.n,
            log_weights=log_weights,
            log_probs=log_probs,
            mean_level=math.fsum(probs * levels),
            expected_value=math.fsum(probs * values),
            tau=tau,
            p_high=p_high,
        )

    @classmethod
    def success_probability(cls, config):
        """
        Probabilité stationnaire de la valeur haute, sous forme logistique.

        B = (β/n)(V_high − V_low), C = S_low/S_high avec
        S_low = Σ_{ℓ<τ} C(n,ℓ)e^{−αβℓ}, S_high = Σ_{ℓ≥τ} C(n,ℓ)e^{−αβℓ}.
        Pour β = 0 la formule se réduit à Σ_{ℓ≥τ} C(n,ℓ)/2ⁿ.

        Returns:
            SuccessProbability
        """
        alpha = cls.require_lumpable(config)
        technology = config.technology
        if not isinstance(technology, ThresholdTechnology):
            raise UnsupportedCombinationError("technologie à seuil requise", field='technology.kind')
        levels = np.arange(config.n + 1)
        base = log_binomial(config.n, levels) - alpha * config.beta * levels
        log_s_low = float(logsumexp(base[:technology.tau]))
        log_s_high = float(logsumexp(base[technology.tau:]))
        log_c = log_s_low - log_s_high
        b = config.beta * technology.delta_v / config.n
        p_high = float(expit(config.rho * b - log_c))
        if config.beta == 0:
            logger.debug("β = 0 : p_high = Σ_{ℓ≥τ} C(n,ℓ)/2ⁿ")
        return SuccessProbability(
            rho=config.rho, p_high=p_high, b=b, c=math.exp(log_c) if log_c < 700 else math.inf,
            log_c=log_c, log_s_low=log_s_low, log_s_high=log_s_high,
        )

    @classmethod
    def expected_hitting_exact(cls, config, start, target, chain=None):
        """
        Temps d'atteinte espéré exact de target depuis start :
        Σ_{start ≤ ℓ < target} π̂([0, ℓ]) / (π̂(ℓ)·p(ℓ)), sommé avec compensation.

        Returns:
            HittingTime: value = inf et finite = False si p(ℓ) = 0 sur le chemin
        """
        chain = chain or cls.build_chain(config)
        start, target = cls._check_levels(config, start, target)
        if target <= start:
            return HittingTime(start=start, target=target, value=0.0, log_value=-math.inf)
        log_probs = chain.log_probs
        log_cumulative = np.logaddexp.accumulate(log_probs)
        path = slice(start, target)
        if np.any(np.isneginf(chain.log_up[path])):
            logger.warning(f"Probabilité de montée nulle entre {start} et {target} : temps d'atteinte infini")
            return HittingTime(start=start, target=target, value=math.inf, log_value=math.inf, finite=False)
        log_terms = log_cumulative[path] - log_probs[path] - chain.log_up[path]
        log_value = float(logsumexp(log_terms))
        if log_value > 700:
            return HittingTime(start=start, target=target, value=math.inf, log_value=log_value, finite=False)
        value = math.fsum(np.exp(log_terms))
        return HittingTime(start=start, target=target, value=value, log_value=log_value)

    @classmethod
    def first_step_hitting(cls, config, start, target, chain=None):
        """
        Oracle indépendant : résout le système tridiagonal de l'analyse au premier pas
        (p+q)h(ℓ) − p·h(ℓ+1) − q·h(ℓ−1) = 1, h(target) = 0.
        """
        chain = chain or cls.build_chain(config)
        start, target = cls._check_levels(config, start, target)
        if target <= start:
            return 0.0
        size = target
        up, down = chain.up[:size], chain.down[:size]
        banded = np.zeros((3, size))
        banded[0, 1:] = -up[:-1]
        banded[1, :] = up + down
        banded[2, :-1] = -down[1:]
        solution = solve_banded((1, 1), banded, np.ones(size))
        return float(solution[start])

    @staticmethod
    def _check_levels(config, *levels):
        checked = []
        for level in levels:
            if isinstance(level, bool) or int(level) != level or not 0 <= level <= config.n:
                raise InvalidConfigError(f"niveau {level} hors de [0, {config.n}]", field='experiment.targets')
            checked.append(int(level))
        return checked

    @classmethod
    def log_drift(cls, config, ell):
        if not 0 <= ell < config.n:
            raise InvalidConfigError(f"dérive définie pour 0 ≤ ℓ < n, reçu {ell}", field='ell')
        log_weights = cls.log_weights(config)
        return float(log_weights[ell + 1] - log_weights[ell])

    @classmethod
    def drift(cls, config, ell):
        """Dérive d(ℓ) = π̂(ℓ+1)/π̂(ℓ) ; sur une zone plate ((n−ℓ)/(ℓ+1))·e^{−αβ}."""
        return math.exp(cls.log_drift(config, ell))

    @classmethod
    def ell_star(cls, config):
        """ℓ* = n/(1 + e^{αβ}), niveau moyen atteint rapidement sur une zone plate."""
        alpha = config.uniform_cost
        if alpha is None:
            raise UnsupportedCombinationError("coûts uniformes requis pour ℓ*", field='costs')
        return config.n * float(expit(-alpha * config.beta))

    @classmethod
    def linear_ell_star(cls, config):
        """Niveau moyen n/(1 + e^{−βΓ}) de la technologie linéaire, Γ = (ρ/n)λ_V − α."""
        alpha = cls.require_lumpable(config)
        if not isinstance(config.technology, LinearTechnology):
            raise UnsupportedCombinationError("technologie linéaire requise", field='technology.kind')
        gamma = config.reward_rate * config.technology.lambda_v - alpha
        return config.n * float(expit(config.beta * gamma))

    @classmethod
    def linear_log_partition(cls, config):
        """log Z = n·log(1 + e^{βΓ}) pour la technologie linéaire."""
        alpha = cls.require_lumpable(config)
        if not isinstance(config.technology, LinearTechnology):
            raise UnsupportedCombinationError("technologie linéaire requise", field='technology.kind')
        gamma = config.reward_rate * config.technology.lambda_v - alpha
        return config.n * float(np.logaddexp(0.0, config.beta * gamma))

    @classmethod
    def t_cutoff(cls, config, chain=None):
        """
        T_cutoff = max(Σ_{ℓ<ℓ0} π̂([0,ℓ])/(π̂(ℓ)p(ℓ)), Σ_{ℓ>ℓ0} π̂([ℓ,n])/(π̂(ℓ)q(ℓ))),
        avec ℓ0 le plus petit état tel que π̂([0,ℓ0]) ≥ 1/2.

        Returns:
            CutoffReport: ℓ0, T_cutoff et l'encadrement du temps de mélange
        """
        chain = chain or cls.build_chain(config)
        log_probs = chain.log_probs
        log_left = np.logaddexp.accumulate(log_probs)
        log_right = np.logaddexp.accumulate(log_probs[::-1])[::-1]
        ell0 = int(np.argmax(log_left >= math.log(0.5)))
        left_terms = log_left[:ell0] - log_probs[:ell0] - chain.log_up[:ell0]
        right_terms = log_right[ell0 + 1:] - log_probs[ell0 + 1:] - chain.log_down[ell0 + 1:]
        left_sum = math.fsum(np.exp(left_terms)) if left_terms.size else 0.0
        right_sum = math.fsum(np.exp(right_terms)) if right_terms.size else 0.0
        t_cutoff = max(left_sum, right_sum)
        return CutoffReport(
            ell0=ell0, t_cutoff=t_cutoff, left_sum=left_sum, right_sum=right_sum,
            mix_lower=t_cutoff * MIXING_LOWER_FACTOR, mix_upper=t_cutoff * MIXING_UPPER_FACTOR,
        )

    @classmethod
    def lumped_kernel(cls, config):
        """Noyau dense de la chaîne agrégée sur les niveaux 0..n."""
        return cls.build_chain(config).kernel()

    @classmethod
    def exact_mixing_time(cls, config, epsilon=0.25, max_steps=None):
        """
        Temps de mélange en variation totale par puissances du noyau dense :
        plus petit t tel que max_x ‖P^t(x, ·) − π̂‖_TV ≤ ε.

        Raises:
            ResourceLimitError: Si t dépasse le plafond MIXING_MAX_STEPS
        """
        chain = cls.build_chain(config)
        kernel = chain.kernel()
        target = chain.probs
        max_steps = max_steps or lab_setting('MIXING_MAX_STEPS')
        distributions = np.eye(config.n + 1)
        for step in range(1, max_steps + 1):
            distributions = distributions @ kernel
            distance = 0.5 * np.abs(distributions - target).sum(axis=1).max()
            if distance <= epsilon:
                return step
        raise ResourceLimitError(f"temps de mélange supérieur à {max_steps} pas", field='experiment.cap')

    @staticmethod
    def full_gibbs_lumped(config):
        """
        Mesure de Gibbs ∝ exp(β·φ(a)) sur les 2ⁿ profils, agrégée par niveau ℓ.

        Sert d'oracle pour π̂ ; accepte des coûts hétérogènes.
        """
        if not config.is_binary:
            raise UnsupportedCombinationError("actions binaires requises", field='actions')
        grids = GameService.profile_grid(config)
        log_weights = config.beta * GameService.potential_grid(config, grids)
        log_weights = log_weights - logsumexp(log_weights)
        levels = np.rint(np.sum(grids, axis=0)).astype(int)
        lumped = np.full(config.n + 1, -np.inf)
        for ell in range(config.n + 1):
            selected = log_weights[levels == ell]
            if selected.size:
                lumped[ell] = logsumexp(selected)
        return np.exp(lumped)

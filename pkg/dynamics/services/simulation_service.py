# dynamics/services/simulation_service.py
# Simulation Monte-Carlo de la dynamique logit : pas, trajectoires, temps d'atteinte, balayages

import logging
import math

import numpy as np
from scipy.stats import norm

from chains.services.birth_death_service import BirthDeathService
from common.exceptions import InvalidConfigError, UnsupportedCombinationError
from common.utils import lab_setting, parallel_map, worker_count
from games.domain import Profile
from games.services.game_service import GameService
from games.technologies import ThresholdTechnology
from .logit_service import LogitService
from ..records import DynamicsState, EmpiricalDistribution, HittingEstimate, SweepResult, TrajectoryRecord

logger = logging.getLogger('airdrop_lab')

CONFIDENCE_Z = float(norm.ppf(0.975))


def trial_generator(seed, trial):
    """Flux aléatoire propre au couple (graine maîtresse, indice d'essai)."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def _hitting_batch(task):
    config, target, cap, seed, trials = task
    return SimulationService.hitting_steps(config, target, cap, seed, trials)


def _occupancy_task(task):
    config, steps, seed, stride, trial, tau = task
    trajectory = SimulationService.run_trajectory(config, steps, seed, stride=stride, trial=trial)
    return SimulationService.post_hit_occupancy(trajectory, tau)


class SimulationService:
    """
    Dynamique logit : à chaque pas un joueur tiré uniformément révise son action.

    Chaque pas consomme exactement deux uniformes du flux de l'essai (joueur, action),
    si bien que le chemin rapide (jeux anonymes binaires) et le chemin générique
    produisent la même trajectoire pour une même graine.
    """

    @staticmethod
    def uses_fast_path(config):
        return config.is_anonymous and config.is_binary

    @staticmethod
    def is_lumpable(config):
        return config.is_anonymous and config.is_binary and config.uniform_cost is not None

    @staticmethod
    def initial_profile(config, initial=None):
        """Profil de départ : la plus petite action de chaque joueur (le profil nul en binaire)."""
        if initial is None:
            return tuple(action_set[0] for action_set in config.actions)
        return Profile.of(config, initial).a

    @staticmethod
    def step(config, state, rng):
        """
        Un pas de la dynamique depuis state.

        Returns:
            DynamicsState: Au plus une coordonnée modifiée, pas incrémenté
        """
        u_player, u_action = rng.random(2)
        i = min(int(u_player * config.n), config.n - 1)
        probs = LogitService.logit_response(config, state.profile, i)
        k = min(int(np.searchsorted(np.cumsum(probs), u_action, side='right')), len(probs) - 1)
        profile = state.profile[:i] + (config.actions[i][k],) + state.profile[i + 1:]
        return DynamicsState.of(config, profile, step=state.step + 1)

    @staticmethod
    def _fast_levels(config, rng, profile, steps):
        """Génère (ℓ, profil courant) après chaque pas ; le profil est une liste mutée sur place."""
        table, player_class = LogitService.zero_probability_table(config)
        table, player_class = table.tolist(), player_class.tolist()
        n = config.n
        chunk = lab_setting('DRAW_CHUNK')
        current = [int(x) for x in profile]
        ell = sum(current)
        done = 0
        while done < steps:
            block = rng.random((min(chunk, steps - done), 2)).tolist()
            for u_player, u_action in block:
                i = min(int(u_player * n), n - 1)
                others = ell - current[i]
                chosen = 1 if u_action >= table[player_class[i]][others] else 0
                current[i] = chosen
                ell = others + chosen
                yield ell, current
            done += len(block)

    @classmethod
    def run_trajectory(cls, config, steps, seed, stride=1, initial=None, trial=0):
        """
        Simule steps pas et enregistre le pas 0 puis tous les stride pas.

        Args:
            config (GameConfig): Jeu simulé
            steps (int): Nombre de pas (≥ 1)
            seed (int): Graine maîtresse
            stride (int): Pas d'enregistrement
            initial: Profil de départ (profil nul par défaut)
            trial (int): Indice d'essai dérivant le flux aléatoire

        Returns:
            TrajectoryRecord

        Raises:
            InvalidConfigError: Si steps < 1 ou stride < 1
        """
        if isinstance(steps, bool) or int(steps) != steps or steps < 1:
            raise InvalidConfigError("au moins un pas de simulation requis", field='experiment.steps')
        if int(stride) != stride or stride < 1:
            raise InvalidConfigError("le pas d'enregistrement doit être ≥ 1", field='experiment.stride')
        steps, stride = int(steps), int(stride)
        rng = trial_generator(seed, trial)
        start = cls.initial_profile(config, initial)
        initial_state = DynamicsState.of(config, start)
        recorded_steps = [0]
        ells = [initial_state.ell]
        values = [initial_state.value]
        potentials = [GameService.potential(config, start)]

        if cls.uses_fast_path(config):
            level_values = config.technology.level_values()
            costs = np.asarray(config.costs)
            alpha = config.uniform_cost
            final = list(int(x) for x in start)
            for t, (ell, current) in enumerate(cls._fast_levels(config, rng, start, steps), start=1):
                if t % stride == 0:
                    social_cost = alpha * ell if alpha is not None else float(costs @ np.asarray(current))
                    recorded_steps.append(t)
                    ells.append(ell)
                    values.append(level_values[ell])
                    potentials.append(config.reward_rate * level_values[ell] - social_cost)
                final = current
            final_profile = tuple(float(x) for x in final)
        else:
            state = initial_state
            for t in range(1, steps + 1):
                state = cls.step(config, state, rng)
                if t % stride == 0:
                    recorded_steps.append(t)
                    ells.append(state.ell)
                    values.append(state.value)
                    potentials.append(GameService.potential(config, state.profile))
            final_profile = state.profile

        return TrajectoryRecord(
            seed=int(seed), trial=int(trial), stride=stride, steps=recorded_steps,
            ells=ells, values=values, potentials=potentials, final_profile=final_profile,
        )

    @classmethod
    def hitting_steps(cls, config, target, cap, seed, trials):
        """
        Premier pas où Σa_i ≥ target pour chaque essai de trials (None si censuré).

        Les essais d'un même lot avancent ensemble sur le chemin rapide.
        """
        trials = [int(t) for t in trials]
        start_level = math.fsum(cls.initial_profile(config))
        if start_level >= target:
            return [0] * len(trials)
        if cls.uses_fast_path(config):
            return cls._fast_hitting_steps(config, target, cap, seed, trials)

        hits = []
        for trial in trials:
            rng = trial_generator(seed, trial)
            state = DynamicsState.of(config, cls.initial_profile(config))
            hit = None
            for t in range(1, cap + 1):
                state = cls.step(config, state, rng)
                if state.ell >= target:
                    hit = t
                    break
            hits.append(hit)
        return hits

    @staticmethod
    def _fast_hitting_steps(config, target, cap, seed, trials):
        table, player_class = LogitService.zero_probability_table(config)
        n = config.n
        chunk = lab_setting('DRAW_CHUNK')
        generators = [trial_generator(seed, trial) for trial in trials]
        hits = [None] * len(trials)
        active = np.arange(len(trials))
        profiles = np.zeros((len(trials), n), dtype=np.int64)
        ells = np.zeros(len(trials), dtype=np.int64)
        elapsed = 0
        while active.size and elapsed < cap:
            length = min(chunk, cap - elapsed)
            draws = np.stack([generators[k].random((length, 2)) for k in active])
            players = np.minimum((draws[:, :, 0] * n).astype(np.int64), n - 1)
            rows = np.arange(active.size)
            done = np.zeros(active.size, dtype=bool)
            for j in range(length):
                i = players[:, j]
                previous = profiles[rows, i]
                others = ells - previous
                chosen = (draws[:, j, 1] >= table[player_class[i], others]).astype(np.int64)
                chosen = np.where(done, previous, chosen)
                profiles[rows, i] = chosen
                ells = others + chosen
                reached = ~done & (ells >= target)
                if reached.any():
                    for k in np.flatnonzero(reached):
                        hits[active[k]] = elapsed + j + 1
                    done |= reached
                    if done.all():
                        break
            elapsed += length
            keep = ~done
            active, profiles, ells = active[keep], profiles[keep], ells[keep]
        return hits

    @staticmethod
    def summarize_hitting(target, samples, cap):
        """Moyenne, erreur standard et intervalle à 95 % parmi les essais non censurés."""
        hits = np.array([s for s in samples if s is not None], dtype=float)
        successes = int(hits.size)
        if successes < len(samples):
            logger.warning(f"Temps d'atteinte de {target} : {len(samples) - successes} essai(s) censuré(s) à {cap} pas")
        mean = float(hits.mean()) if successes else None
        std_error = float(hits.std(ddof=1) / math.sqrt(successes)) if successes >= 2 else None
        ci_low = ci_high = None
        if std_error is not None:
            ci_low, ci_high = mean - CONFIDENCE_Z * std_error, mean + CONFIDENCE_Z * std_error
        censored_mean = math.fsum(cap if s is None else s for s in samples) / len(samples)
        return HittingEstimate(
            target=target, trials=len(samples), successes=successes, cap=cap,
            mean=mean, std_error=std_error, ci_low=ci_low, ci_high=ci_high,
            censored_mean=censored_mean, samples=tuple(samples),
        )

    @classmethod
    def estimate_hitting_time(cls, config, target, trials, cap=None, seed=0):
        """
        Estime le temps d'atteinte de ℓ ≥ target depuis le profil nul.

        Les essais sont répartis en lots contigus entre processus ; le flux de chaque
        essai ne dépend que de (seed, indice), le résultat est donc indépendant de
        l'ordonnancement.

        Returns:
            HittingEstimate
        """
        top = math.fsum(action_set[-1] for action_set in config.actions)
        if not 0 <= target <= top:
            raise InvalidConfigError(f"cible {target} hors de [0, {top:g}]", field='experiment.targets')
        if isinstance(trials, bool) or int(trials) != trials or trials < 1:
            raise InvalidConfigError("au moins un essai requis", field='experiment.trials')
        cap = int(cap or lab_setting('HITTING_CAP'))
        indices = np.arange(int(trials))
        batches = [batch.tolist() for batch in np.array_split(indices, min(worker_count(), int(trials)))]
        logger.info(f"Estimation du temps d'atteinte de {target} : {trials} essais, plafond {cap}")
        results = parallel_map(_hitting_batch, [(config, target, cap, seed, batch) for batch in batches])
        samples = [hit for batch in results for hit in batch]
        return cls.summarize_hitting(target, samples, cap)

    @staticmethod
    def post_hit_occupancy(trajectory, tau):
        """Part des pas enregistrés avec ℓ ≥ τ à partir du premier passage (None sans passage)."""
        reached = np.flatnonzero(trajectory.ells >= tau)
        if reached.size == 0:
            return None
        return float(np.mean(trajectory.ells[reached[0]:] >= tau))

    @classmethod
    def empirical_distribution(cls, config, steps, burn_in, seed, trial=0):
        """
        Fréquences de ℓ sur steps pas suivant burn_in pas de rodage.

        La référence est π̂ à coût uniforme, la mesure de Gibbs agrégée sinon.

        Raises:
            UnsupportedCombinationError: Technologie non anonyme ou actions non binaires
        """
        if not cls.uses_fast_path(config):
            raise UnsupportedCombinationError(
                "distribution empirique de ℓ réservée aux jeux anonymes binaires", field='technology.kind'
            )
        if steps < 1 or burn_in < 0:
            raise InvalidConfigError("steps ≥ 1 et burn_in ≥ 0 requis", field='experiment.steps')
        if config.uniform_cost is not None:
            reference = BirthDeathService.stationary(config).probs
        else:
            reference = BirthDeathService.full_gibbs_lumped(config)

        counts = [0] * (config.n + 1)
        rng = trial_generator(seed, trial)
        start = cls.initial_profile(config)
        for t, (ell, _) in enumerate(cls._fast_levels(config, rng, start, burn_in + steps), start=1):
            if t > burn_in:
                counts[ell] += 1
        frequencies = np.array(counts, dtype=float) / steps
        tv_distance = 0.5 * float(np.abs(frequencies - reference).sum())
        logger.info(f"Distribution empirique sur {steps} pas : distance en variation totale {tv_distance:.4g}")
        return EmpiricalDistribution(
            samples=steps, burn_in=burn_in, frequencies=frequencies,
            stationary=reference, tv_distance=tv_distance,
        )

    @classmethod
    def alpha_sweep(cls, config, alphas, target, trials, cap=None, seed=0):
        """Temps d'atteinte empirique (et exact si la chaîne est agrégeable) pour chaque coût α."""
        rows = []
        for alpha in alphas:
            swept = config.with_costs(alpha)
            estimate = cls.estimate_hitting_time(swept, target, trials, cap=cap, seed=seed)
            exact = None
            if cls.is_lumpable(swept) and float(target).is_integer():
                exact = BirthDeathService.expected_hitting_exact(swept, 0, int(target)).value
            rows.append(SweepResult(
                parameter='alpha', value=float(alpha), trials=estimate.trials, successes=estimate.successes,
                mean_hitting=estimate.mean, std_error=estimate.std_error, exact_hitting=exact,
            ))
        return rows

    @classmethod
    def rho_sweep(cls, config, rhos, steps, trials, seed=0, tau=None, stride=1):
        """
        Occupation moyenne de {ℓ ≥ τ} après le premier passage, pour chaque ρ.

        Les mêmes flux aléatoires servent à toutes les valeurs de ρ.
        """
        if tau is None:
            if not isinstance(config.technology, ThresholdTechnology):
                raise InvalidConfigError("τ requis hors technologie à seuil", field='experiment.tau')
            tau = config.technology.tau
        rows = []
        for rho in rhos:
            swept = config.with_rho(rho)
            occupancies = parallel_map(
                _occupancy_task, [(swept, steps, seed, stride, trial, tau) for trial in range(trials)]
            )
            reached = [o for o in occupancies if o is not None]
            p_high = None
            if cls.is_lumpable(swept) and isinstance(swept.technology, ThresholdTechnology):
                p_high = BirthDeathService.success_probability(swept).p_high
            rows.append(SweepResult(
                parameter='rho', value=float(rho), trials=trials, successes=len(reached),
                occupancy=math.fsum(reached) / len(reached) if reached else None, p_high=p_high,
            ))
        return rows

# experiments/services/runner_service.py
# Orchestration des expériences : un traitement par type, fichiers écrits via OutputWriter

import logging
import math

import numpy as np

from chains.serializers import (
    CutoffReportSerializer,
    HittingTimeSerializer,
    MixingLowerBoundSerializer,
    StationaryLawSerializer,
    SuccessProbabilitySerializer,
)
from chains.services.birth_death_service import BirthDeathService
from chains.services.bounds_service import BoundsService
from common.exceptions import InvalidConfigError
from common.utils import lab_setting
from designer.serializers import OptimalAirdropSerializer, ProfitCurveSerializer
from designer.services.profit_service import ProfitService
from dynamics.serializers import EmpiricalDistributionSerializer, HittingEstimateSerializer
from dynamics.services.simulation_service import SimulationService
from equilibria.serializers import (
    DesignerRegimeSerializer,
    EquilibriumReportSerializer,
    LinearEquilibriumValueSerializer,
    LinearOptimumSerializer,
    QuadraticRegimeSerializer,
)
from equilibria.services.designer_regime_service import DesignerRegimeService
from equilibria.services.equilibrium_service import EquilibriumService
from games.technologies import LinearTechnology, QuadraticTechnology, ThresholdTechnology
from ..records import RunResult
from .output_service import OutputWriter

logger = logging.getLogger('airdrop_lab')

DEFAULT_PROFIT_POINTS = 101

TRAJECTORY_FIELDS = ['step', 'ell', 'value', 'potential']
SWEEP_FIELDS = ['parameter', 'value', 'trials', 'successes', 'mean_hitting', 'std_error',
                'exact_hitting', 'occupancy', 'p_high']
TIMES_FIELDS = [
    'beta', 'alpha', 'target', 'ell0', 't_cutoff', 'mix_lower', 'mix_upper', 'exact_mixing',
    'mixing_lower_bound', 'ell_star', 'ell_star_upper', 'exact_hitting_ell_star', 'exact_hitting',
    'first_step_hitting', 'interval_low', 'interval_high', 'lower_bound', 'drift_form', 'steep_form',
    'threshold_form', 'threshold_best', 'threshold_stated_form', 'ell_star_form', 'linear_form',
    'mc_trials', 'mc_successes', 'mc_mean', 'mc_std_error',
]


def _grid_label(value):
    return format(float(value), 'g')


class RunnerService:
    """Exécute une ExperimentConfig et rassemble les fichiers produits et le résumé."""

    @classmethod
    def run(cls, experiment, reproducible=False):
        """
        Lance l'expérience décrite par la configuration.

        Args:
            experiment (ExperimentConfig): Configuration validée
            reproducible (bool): Sorties identiques octet pour octet (pas d'horodatage)

        Returns:
            RunResult
        """
        handler = getattr(cls, f"run_{experiment.kind}")
        writer = OutputWriter(experiment.output_dir, experiment.config_hash, experiment.kind, reproducible)
        logger.info(f"Début de l'expérience {experiment.kind} ({experiment.config_hash[:12]})")
        summary = handler(experiment, writer)
        logger.info(f"Expérience {experiment.kind} terminée : {len(writer.written)} fichier(s)")
        return RunResult(
            kind=experiment.kind, config_hash=experiment.config_hash,
            outputs=list(writer.written), summary=summary,
        )

    @staticmethod
    def _sweep_configs(game, params):
        """Combinaisons (β, α) des grilles optionnelles, triées ; None = valeur de la configuration."""
        betas = sorted(params['beta_grid']) if params.get('beta_grid') else [None]
        alphas = sorted(params['alpha_grid']) if params.get('alpha_grid') else [None]
        combos = []
        for beta in betas:
            for alpha in alphas:
                config = game
                if beta is not None:
                    config = config.with_beta(beta)
                if alpha is not None:
                    config = config.with_costs(alpha)
                combos.append((config.beta, config.uniform_cost, config))
        return combos

    @staticmethod
    def _seed(params):
        seeds = params.get('seeds') or [0]
        return seeds[0]

    @staticmethod
    def _integer_targets(params, game, default):
        targets = params.get('targets') or default
        checked = []
        for target in targets:
            if not float(target).is_integer() or not 0 <= target <= game.n:
                raise InvalidConfigError(f"cible {target} : niveau entier de [0, {game.n}] attendu",
                                         field='experiment.targets')
            checked.append(int(target))
        return sorted(set(checked))

    # --- equilibria -------------------------------------------------------------

    @classmethod
    def run_equilibria(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        report = EquilibriumService.analyze(game, params.get('method', 'auto'))
        payload = {'report': EquilibriumReportSerializer(report).data}
        technology = game.technology
        if isinstance(technology, ThresholdTechnology) and game.uniform_cost is not None and game.is_binary:
            regime = DesignerRegimeService.threshold_designer_regime(game, epsilon=params.get('epsilon'))
            payload['designer_regime'] = DesignerRegimeSerializer(regime).data
        elif isinstance(technology, LinearTechnology) and game.is_binary:
            if game.uniform_cost is not None:
                value = DesignerRegimeService.linear_equilibrium_value(game)
                payload['linear_equilibrium_value'] = LinearEquilibriumValueSerializer(value).data
            optimum = DesignerRegimeService.linear_optimal_rho(game.costs, technology.lambda_v, game.n, game.d_v)
            payload['linear_optimum'] = LinearOptimumSerializer(optimum).data
        elif isinstance(technology, QuadraticTechnology) and game.uniform_cost is not None and game.is_binary:
            payload['quadratic_regime'] = QuadraticRegimeSerializer(
                DesignerRegimeService.quadratic_regimes_for(game)
            ).data
        writer.write_json('equilibria.json', payload)
        summary = {
            'method': report.method,
            'pne_count': report.pne_count,
            'potmax_count': report.potmax_count,
            'consistent': report.consistent,
            'equilibrium_levels': report.equilibrium_levels(),
        }
        if 'designer_regime' in payload:
            summary['regime'] = payload['designer_regime']['regime']
        return summary

    # --- stationary -------------------------------------------------------------

    @classmethod
    def run_stationary(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        law = BirthDeathService.stationary(game)
        data = StationaryLawSerializer(law).data
        metadata = {key: data[key] for key in ('n', 'mean_level', 'expected_value', 'tau', 'p_high')}
        summary = {'mean_level': law.mean_level, 'expected_value': law.expected_value}
        if isinstance(game.technology, ThresholdTechnology):
            success = SuccessProbabilitySerializer(BirthDeathService.success_probability(game)).data
            metadata['success_probability'] = success
            summary['p_high'] = success['p_high']
        if isinstance(game.technology, LinearTechnology):
            metadata['ell_star'] = BirthDeathService.linear_ell_star(game)
            metadata['log_partition'] = BirthDeathService.linear_log_partition(game)
            summary['ell_star'] = metadata['ell_star']
        writer.write_table('stationary', experiment.output_format, ['ell', 'log_weight', 'prob'],
                           data['rows'], metadata)

        if params.get('steps'):
            distribution = SimulationService.empirical_distribution(
                game, params['steps'], params.get('burn_in', 0), cls._seed(params)
            )
            empirical = EmpiricalDistributionSerializer(distribution).data
            writer.write_table(
                'empirical', experiment.output_format, ['ell', 'frequency', 'prob'], empirical['rows'],
                {'samples': empirical['samples'], 'burn_in': empirical['burn_in'],
                 'tv_distance': empirical['tv_distance'], 'seed': cls._seed(params)},
            )
            summary['tv_distance'] = distribution.tv_distance
        return summary

    # --- simulate ---------------------------------------------------------------

    @classmethod
    def run_simulate(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        rhos = sorted(params['rho_grid']) if params.get('rho_grid') else [game.rho]
        tau = params.get('tau')
        if tau is None and isinstance(game.technology, ThresholdTechnology):
            tau = game.technology.tau
        occupancy_rows = []
        for rho in rhos:
            config = game.with_rho(rho)
            for seed in experiment.seeds:
                trajectory = SimulationService.run_trajectory(
                    config, params['steps'], seed, stride=params.get('stride', 1)
                )
                name = f"trajectory_seed{seed}"
                if params.get('rho_grid'):
                    name = f"trajectory_rho{_grid_label(rho)}_seed{seed}"
                writer.write_table(name, experiment.output_format, TRAJECTORY_FIELDS, trajectory.rows(),
                                   {'rho': rho, 'seed': seed, 'stride': trajectory.stride})
                if tau is not None:
                    occupancy_rows.append({
                        'rho': rho,
                        'seed': seed,
                        'first_passage': trajectory.first_passage(tau),
                        'occupancy': SimulationService.post_hit_occupancy(trajectory, tau),
                    })

        summary = {'trajectories': len(rhos) * len(experiment.seeds), 'steps': params['steps']}
        if occupancy_rows:
            writer.write_table('occupancy', experiment.output_format,
                               ['rho', 'seed', 'first_passage', 'occupancy'], occupancy_rows, {'tau': tau})
            summary['occupancy'] = [
                {'rho': row['rho'], 'seed': row['seed'], 'occupancy': row['occupancy']} for row in occupancy_rows
            ]
        if params.get('trials') and tau is not None:
            sweep = SimulationService.rho_sweep(
                game, rhos, params['steps'], params['trials'], seed=cls._seed(params),
                tau=tau, stride=params.get('stride', 1),
            )
            writer.write_table('rho_sweep', experiment.output_format, SWEEP_FIELDS,
                               [row.to_dict() for row in sweep], {'tau': tau})
            summary['rho_sweep'] = [{'rho': row.value, 'occupancy': row.occupancy} for row in sweep]
        return summary

    # --- hitting ----------------------------------------------------------------

    @classmethod
    def run_hitting(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        cap = params.get('cap')
        lumpable = SimulationService.is_lumpable(game)
        estimates, trial_rows = [], []
        for target in sorted(params['targets']):
            exact = None
            if lumpable and float(target).is_integer() and target <= game.n:
                exact = HittingTimeSerializer(BirthDeathService.expected_hitting_exact(game, 0, int(target))).data
            for seed in experiment.seeds:
                estimate = SimulationService.estimate_hitting_time(game, target, params['trials'], cap=cap, seed=seed)
                entry = dict(HittingEstimateSerializer(estimate).data)
                entry.update({'seed': seed, 'exact': exact})
                estimates.append(entry)
                trial_rows.extend({'target': target, 'seed': seed, **row} for row in estimate.sample_rows())

        writer.write_json('hitting.json', {'trials': params['trials'], 'estimates': estimates})
        writer.write_table('hitting_trials', experiment.output_format,
                           ['target', 'seed', 'trial', 'hit_step', 'censored'], trial_rows)
        summary = {
            'estimates': [
                {'target': e['target'], 'seed': e['seed'], 'mean': e['mean'], 'censored': e['censored'],
                 'exact': e['exact']['value'] if e['exact'] else None}
                for e in estimates
            ],
        }

        if params.get('alpha_grid'):
            sweep_rows = []
            for target in sorted(params['targets']):
                sweep = SimulationService.alpha_sweep(
                    game, sorted(params['alpha_grid']), target, params['trials'], cap=cap, seed=cls._seed(params)
                )
                sweep_rows.extend({'target': target, **row.to_dict()} for row in sweep)
            writer.write_table('alpha_sweep', experiment.output_format, ['target'] + SWEEP_FIELDS, sweep_rows)
            summary['alpha_sweep'] = [
                {'target': row['target'], 'alpha': row['value'], 'mean_hitting': row['mean_hitting']}
                for row in sweep_rows
            ]
        return summary

    # --- phase ------------------------------------------------------------------

    @classmethod
    def run_phase(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        DesignerRegimeService.require_threshold(game)
        rhos = sorted(params['rho_grid'])
        study = bool(params.get('beta_grid') or params.get('alpha_grid'))
        rows, stationary_rows, blocks = [], [], []
        for beta, alpha, config in cls._sweep_configs(game, params):
            success = BirthDeathService.success_probability(config)
            rho_c = DesignerRegimeService.threshold_critical_rho(config)
            rho_half = success.log_c / success.b if success.b > 0 else None
            for rho, p_high in zip(rhos, success.at(rhos)):
                if math.isclose(rho, rho_c, rel_tol=1e-12, abs_tol=1e-12):
                    side = 'critical'
                else:
                    side = 'above' if rho > rho_c else 'below'
                rows.append({'beta': beta, 'alpha': alpha, 'rho': rho, 'p_high': float(p_high),
                             'rho_c': rho_c, 'side': side})
            blocks.append({'beta': beta, 'alpha': alpha, 'rho_c': rho_c, 'rho_half': rho_half,
                           'b': success.b, 'log_c': success.log_c})
            if study:
                law = BirthDeathService.stationary(config)
                stationary_rows.extend(
                    {'beta': beta, 'alpha': alpha, 'ell': ell, 'prob': float(prob)}
                    for ell, prob in enumerate(law.probs)
                )

        writer.write_table('phase', experiment.output_format,
                           ['beta', 'alpha', 'rho', 'p_high', 'rho_c', 'side'], rows, {'blocks': blocks})
        if study:
            writer.write_table('phase_stationary', experiment.output_format,
                               ['beta', 'alpha', 'ell', 'prob'], stationary_rows)
        return {'blocks': blocks}

    # --- profit -----------------------------------------------------------------

    @classmethod
    def run_profit(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        grid = params.get('rho_grid') or list(np.linspace(0.0, 1.0, DEFAULT_PROFIT_POINTS))
        curve = ProfitService.profit_curve(game, grid)
        data = ProfitCurveSerializer(curve).data
        metadata = {key: data[key] for key in ('b', 'c', 'rho_bar', 'rho_star', 'profit_star', 'd_v',
                                               'closed_form', 'max_relative_gap')}
        metadata['regime'] = None
        summary = {'rho_star': curve.rho_star, 'profit_star': curve.profit_star}

        optimum_payload = {}
        if isinstance(game.technology, ThresholdTechnology):
            optimum = ProfitService.optimal_rho(game)
            optimum_payload['optimum'] = OptimalAirdropSerializer(optimum).data
            optimum_payload['vanishing_noise'] = DesignerRegimeSerializer(
                ProfitService.vanishing_noise_profit(game, epsilon=params.get('epsilon'))
            ).data
            metadata.update({'rho_star': optimum.rho_star, 'profit_star': optimum.profit_star,
                             'regime': optimum.regime, 'rho_bar': optimum.rho_bar})
            summary.update({'rho_star': optimum.rho_star, 'profit_star': optimum.profit_star,
                            'regime': optimum.regime, 'rho_bar': optimum.rho_bar})

        writer.write_table('profit', experiment.output_format, ['rho', 'p_high', 'value', 'profit'],
                           data['points'], metadata)
        if optimum_payload:
            writer.write_json('profit_optimum.json', {'curve': metadata, **optimum_payload})
        return summary

    # --- times ------------------------------------------------------------------

    @classmethod
    def _times_row(cls, config, target, params, chain, common):
        row = dict(common, target=target)
        exact = BirthDeathService.expected_hitting_exact(config, 0, target, chain=chain)
        row['exact_hitting'] = exact.value
        row['first_step_hitting'] = BirthDeathService.first_step_hitting(config, 0, target, chain=chain)
        if target >= 1:
            if params.get('interval'):
                low, high = params['interval']
            else:
                low, high = min(math.ceil(common['ell_star']), target - 1), target
            bound = BoundsService.hitting_lower_bound(config, (low, high), target)
            row.update({
                'interval_low': low, 'interval_high': high, 'lower_bound': bound.best,
                'drift_form': bound.drift_form, 'steep_form': bound.steep_form,
                'threshold_form': bound.threshold_form, 'threshold_best': bound.threshold_best,
                'threshold_stated_form': bound.threshold_stated_form,
                'ell_star_form': bound.ell_star_form, 'linear_form': bound.linear_form,
            })
            if exact.finite and bound.best > exact.value * (1 + 1e-9):
                logger.warning(f"Borne inférieure {bound.best:.6g} au-dessus du temps exact {exact.value:.6g}")
        if params.get('trials'):
            estimate = SimulationService.estimate_hitting_time(
                config, target, params['trials'], cap=params.get('cap'), seed=cls._seed(params)
            )
            row.update({'mc_trials': estimate.trials, 'mc_successes': estimate.successes,
                        'mc_mean': estimate.mean, 'mc_std_error': estimate.std_error})
        return row

    @classmethod
    def run_times(cls, experiment, writer):
        game, params = experiment.game, experiment.params
        BirthDeathService.require_lumpable(game)
        default_target = game.technology.tau if isinstance(game.technology, ThresholdTechnology) else game.n
        targets = cls._integer_targets(params, game, [default_target])
        rows, blocks = [], []
        for beta, alpha, config in cls._sweep_configs(game, params):
            chain = BirthDeathService.build_chain(config)
            cutoff = BirthDeathService.t_cutoff(config, chain=chain)
            ell_star = BirthDeathService.ell_star(config)
            common = {
                'beta': beta, 'alpha': alpha, 'ell0': cutoff.ell0, 't_cutoff': cutoff.t_cutoff,
                'mix_lower': cutoff.mix_lower, 'mix_upper': cutoff.mix_upper, 'ell_star': ell_star,
                'ell_star_upper': BoundsService.hitting_upper_bound_ell_star(config),
                'exact_hitting_ell_star': BirthDeathService.expected_hitting_exact(
                    config, 0, math.ceil(ell_star), chain=chain
                ).value,
            }
            block = {'beta': beta, 'alpha': alpha, 'cutoff': CutoffReportSerializer(cutoff).data}
            if params.get('exact_mixing'):
                common['exact_mixing'] = BirthDeathService.exact_mixing_time(
                    config, epsilon=params.get('mixing_epsilon', 0.25),
                    max_steps=params.get('cap') or lab_setting('MIXING_MAX_STEPS'),
                )
            if isinstance(config.technology, ThresholdTechnology):
                mixing = BoundsService.mixing_lower_bound_threshold(config)
                block['mixing_lower_bound'] = MixingLowerBoundSerializer(mixing).data
                common['mixing_lower_bound'] = mixing.derived_form
            for target in targets:
                rows.append(cls._times_row(config, target, params, chain, common))
            blocks.append(block)

        writer.write_table('times', experiment.output_format, TIMES_FIELDS, rows, {'blocks': blocks})
        return {
            'rows': [
                {'beta': row['beta'], 'alpha': row['alpha'], 'target': row['target'],
                 'exact_hitting': row['exact_hitting'], 'lower_bound': row.get('lower_bound'),
                 't_cutoff': row['t_cutoff']}
                for row in rows
            ],
        }

# experiments/management/base.py
# Commande de base des expériences : options communes, registre des exécutions, codes de sortie

import json
import logging

from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from common.exceptions import AirdropLabError, SchemaError
from experiments.models import ExperimentRun
from experiments.services.config_loader import ConfigLoader
from experiments.services.output_service import json_safe
from experiments.services.runner_service import RunnerService

logger = logging.getLogger('airdrop_lab')


class ExperimentCommand(BaseCommand):
    """
    Base des sous-commandes equilibria, stationary, simulate, hitting, phase, profit et times.

    Le type d'expérience de la commande doit correspondre à experiment.kind du fichier.
    """
    kind = None

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            required=True,
            help='Chemin du fichier JSON décrivant le jeu et l\'expérience'
        )

        parser.add_argument(
            '--out',
            help='Dossier de sortie (remplace output.dir)'
        )

        parser.add_argument(
            '--seed',
            type=int,
            help='Graine unique (remplace experiment.seeds)'
        )

        parser.add_argument(
            '--format',
            choices=['csv', 'json'],
            help='Format des tables produites (remplace output.format)'
        )

        parser.add_argument(
            '--reproducible',
            action='store_true',
            help='Sorties identiques octet pour octet : pas d\'horodatage, 17 chiffres significatifs'
        )

    def load(self, options):
        experiment = ConfigLoader.load_config(
            options['config'], seed=options.get('seed'),
            output_dir=options.get('out'), output_format=options.get('format'),
        )
        if experiment.kind != self.kind:
            raise SchemaError(
                f"le fichier décrit une expérience {experiment.kind}, la commande attend {self.kind}",
                field='experiment.kind',
            )
        return experiment

    def _record(self, experiment, options):
        try:
            return ExperimentRun.objects.create(
                kind=experiment.kind,
                config_hash=experiment.config_hash,
                seed=','.join(str(s) for s in experiment.seeds),
                reproducible=options.get('reproducible', False),
                output_dir=experiment.output_dir,
            )
        except DatabaseError as e:
            logger.warning(f"Registre des exécutions indisponible ({e}) : exécution non enregistrée")
            return None

    def _close(self, run, result=None, error=None):
        if run is None:
            return
        try:
            if error is None:
                run.mark_as_completed(result.outputs, json_safe(result.summary))
            else:
                run.mark_as_failed(error)
        except DatabaseError as e:
            logger.warning(f"Mise à jour du registre impossible pour l'exécution {run.id} : {e}")

    def handle(self, *args, **options):
        try:
            experiment = self.load(options)
        except AirdropLabError as e:
            raise CommandError(str(e), returncode=e.exit_code)

        run = self._record(experiment, options)
        try:
            result = RunnerService.run(experiment, reproducible=options.get('reproducible', False))
        except AirdropLabError as e:
            logger.error(f"Expérience {experiment.kind} interrompue : {e}")
            self._close(run, error=str(e))
            raise CommandError(str(e), returncode=e.exit_code)
        except Exception as e:
            logger.exception(f"Erreur inattendue pendant l'expérience {experiment.kind}")
            self._close(run, error=str(e))
            raise

        self._close(run, result=result)
        self.stdout.write(json.dumps(json_safe(result.to_dict()), ensure_ascii=False, sort_keys=True))

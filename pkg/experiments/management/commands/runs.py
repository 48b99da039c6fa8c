# experiments/management/commands/runs.py
# Liste des dernières exécutions enregistrées

from django.core.management.base import BaseCommand
from django.db import DatabaseError

from experiments.models import ExperimentRun


class Command(BaseCommand):
    help = 'Affiche les dernières exécutions du registre'

    def add_arguments(self, parser):
        parser.add_argument(
            '--limit',
            type=int,
            default=20,
            help='Nombre maximal d\'exécutions affichées'
        )

        parser.add_argument(
            '--kind',
            choices=[choice for choice, _ in ExperimentRun.KIND_CHOICES],
            help='Filtre sur le type d\'expérience'
        )

    def handle(self, *args, **options):
        runs = ExperimentRun.objects.all()
        if options['kind']:
            runs = runs.filter(kind=options['kind'])
        try:
            runs = list(runs[:options['limit']])
        except DatabaseError as e:
            self.stdout.write(self.style.ERROR(f'Registre des exécutions indisponible : {e}'))
            return

        if not runs:
            self.stdout.write(self.style.WARNING('Aucune exécution enregistrée'))
            return

        for run in runs:
            line = (f"{run.created_at.strftime('%d/%m/%Y %H:%M:%S')}  {run.kind:<10}  "
                    f"{run.config_hash[:12]}  graine={run.seed or '-'}  {run.get_status_display()}")
            if run.status == 'completed':
                self.stdout.write(self.style.SUCCESS(line))
            elif run.status == 'failed':
                self.stdout.write(self.style.ERROR(f"{line}  ({run.error_message})"))
            else:
                self.stdout.write(self.style.WARNING(line))
        self.stdout.write(f'{len(runs)} exécution(s) affichée(s)')

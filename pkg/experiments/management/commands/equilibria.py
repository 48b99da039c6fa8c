# experiments/management/commands/equilibria.py
# Équilibres de Nash purs, maximiseurs du potentiel et régime du concepteur

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Énumère les équilibres de Nash purs et les maximiseurs du potentiel (rapport JSON)'
    kind = 'equilibria'

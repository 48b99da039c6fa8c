# experiments/management/commands/times.py
# Temps de mélange et d'atteinte : valeurs exactes et bornes

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Tabule T_cutoff, l'encadrement du temps de mélange, les bornes et les temps d'atteinte exacts"
    kind = 'times'

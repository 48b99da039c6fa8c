# experiments/management/commands/simulate.py
# Trajectoires de la dynamique logit, une par graine et par valeur de ρ

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Simule la dynamique logit et écrit une trajectoire par graine'
    kind = 'simulate'

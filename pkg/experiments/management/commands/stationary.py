# experiments/management/commands/stationary.py
# Loi stationnaire agrégée π̂ de la dynamique logit

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Calcule la loi stationnaire π̂ par niveau de contribution (et la compare à une simulation si steps est fourni)'
    kind = 'stationary'

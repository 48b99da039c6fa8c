# experiments/management/commands/hitting.py
# Estimation Monte-Carlo des temps d'atteinte

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Estime les temps d'atteinte des niveaux cibles depuis le profil nul"
    kind = 'hitting'

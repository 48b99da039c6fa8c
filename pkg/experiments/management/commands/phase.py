# experiments/management/commands/phase.py
# Probabilité de succès p_high sur une grille de ρ

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Trace p_high(ρ) sur une grille de ρ et repère ρ_c'
    kind = 'phase'

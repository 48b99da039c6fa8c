# experiments/management/commands/profit.py
# Profit espéré du concepteur et airdrop optimal

from experiments.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Calcule la courbe de profit du concepteur et le ρ optimal'
    kind = 'profit'

# experiments/records.py
# Configuration d'expérience résolue et résultat d'exécution

from dataclasses import dataclass, field

from games.domain import GameConfig


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Document d'expérience entièrement validé.

    Attributes:
        game (GameConfig): Jeu décrit au premier niveau du document
        kind (str): Type d'expérience
        params (dict): Paramètres propres au type (grilles, essais, graines, cibles…)
        output_dir (str): Dossier des fichiers produits
        output_format (str): csv ou json
        config_hash (str): Empreinte sha256 de la configuration résolue
    """
    game: GameConfig
    kind: str
    params: dict
    output_dir: str
    output_format: str
    config_hash: str

    @property
    def seeds(self):
        return list(self.params.get('seeds') or [])

    def resolved(self):
        """Forme JSON canonique hachée : jeu et paramètres, sans les chemins de sortie."""
        return {'game': self.game.to_dict(), 'experiment': {'kind': self.kind, **self.params}}


@dataclass
class RunResult:
    """Fichiers écrits et résumé lisible par machine d'une exécution."""
    kind: str
    config_hash: str
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'kind': self.kind,
            'config_hash': self.config_hash,
            'outputs': list(self.outputs),
            'summary': self.summary,
        }

# experiments/services/config_loader.py
# Lecture et validation des fichiers de configuration d'expérience

import json
import logging
from pathlib import Path

from rest_framework.exceptions import ErrorDetail

from common.exceptions import ConfigParseError, InvalidConfigError, SchemaError
from common.utils import config_hash
from ..records import ExperimentConfig
from ..serializers import ExperimentDocumentSerializer

logger = logging.getLogger('airdrop_lab')

# Codes DRF relevant d'un invariant violé (bornes, relations entre champs) plutôt que du schéma
INVARIANT_CODES = frozenset({'min_value', 'max_value', 'invariant', 'empty'})


def flatten_errors(errors, prefix=''):
    """
    Aplatit les erreurs imbriquées d'un serializer DRF.

    Returns:
        list: Triplets (chemin pointé, message, code)
    """
    flat = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            if key == 'non_field_errors':
                path = prefix
            else:
                path = f"{prefix}.{key}" if prefix else str(key)
            flat.extend(flatten_errors(value, path))
    elif isinstance(errors, (list, tuple)):
        for item in errors:
            flat.extend(flatten_errors(item, prefix))
    elif isinstance(errors, ErrorDetail):
        flat.append((prefix, str(errors), errors.code))
    else:
        flat.append((prefix, str(errors), 'invalid'))
    return flat


class ConfigLoader:
    """Charge un document JSON et le transforme en ExperimentConfig validée."""

    @staticmethod
    def parse(path):
        """
        Lit le fichier et décode le JSON.

        Raises:
            ConfigParseError: Fichier absent, illisible ou JSON invalide
        """
        path = Path(path)
        try:
            text = path.read_text(encoding='utf-8')
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigParseError(f"lecture impossible de {path} : {e}")
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigParseError(f"JSON invalide dans {path} (ligne {e.lineno}, colonne {e.colno}) : {e.msg}")

    @staticmethod
    def raise_for_errors(errors):
        """
        Classe les erreurs de validation : une seule erreur de schéma suffit à
        donner la catégorie schéma, sinon la configuration viole un invariant.
        """
        flat = flatten_errors(errors)
        message = '; '.join(f"{path or 'document'}: {text}" for path, text, _ in flat)
        schema = [(path, code) for path, _, code in flat if code not in INVARIANT_CODES]
        if schema:
            raise SchemaError(message, field=schema[0][0] or None)
        raise InvalidConfigError(message, field=flat[0][0] or None)

    @classmethod
    def validate(cls, document, seed=None, output_dir=None, output_format=None):
        """
        Valide un document déjà décodé.

        Args:
            document (dict): Contenu du fichier
            seed (int): Graine imposée par --seed (remplace experiment.seeds)
            output_dir (str): Dossier imposé par --out
            output_format (str): Format imposé par --format

        Returns:
            ExperimentConfig
        """
        if not isinstance(document, dict):
            raise SchemaError("un objet JSON est attendu au premier niveau")
        document = dict(document)
        if seed is not None and isinstance(document.get('experiment'), dict):
            document['experiment'] = {**document['experiment'], 'seeds': [seed]}
        if output_dir is not None or output_format is not None:
            output = dict(document.get('output') or {})
            if output_dir is not None:
                output['dir'] = str(output_dir)
            if output_format is not None:
                output['format'] = output_format
            document['output'] = output

        serializer = ExperimentDocumentSerializer(data=document)
        if not serializer.is_valid():
            cls.raise_for_errors(serializer.errors)

        game = serializer.to_game_config()
        params = serializer.experiment_params()
        kind = serializer.validated_data['experiment']['kind']
        out_dir, out_format = serializer.output_options()
        resolved = {'game': game.to_dict(), 'experiment': {'kind': kind, **params}}
        return ExperimentConfig(
            game=game, kind=kind, params=params, output_dir=out_dir,
            output_format=out_format, config_hash=config_hash(resolved),
        )

    @classmethod
    def load_config(cls, path, seed=None, output_dir=None, output_format=None):
        """
        Charge et valide un fichier d'expérience.

        Raises:
            ConfigParseError: Code de sortie 2
            SchemaError: Code de sortie 3
            InvalidConfigError: Code de sortie 4
        """
        document = cls.parse(path)
        config = cls.validate(document, seed=seed, output_dir=output_dir, output_format=output_format)
        logger.info(f"Configuration {path} chargée : expérience {config.kind}, empreinte {config.config_hash[:12]}")
        return config

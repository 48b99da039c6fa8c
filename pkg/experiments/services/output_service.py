# experiments/services/output_service.py
# Écriture des artefacts CSV et JSON avec l'empreinte de configuration en en-tête

import csv
import json
import logging
import math
from pathlib import Path

import numpy as np
from django.utils import timezone

from common.utils import format_float

logger = logging.getLogger('airdrop_lab')


def json_safe(value):
    """Convertit récursivement les types numpy et les flottants non finis ('inf', '-inf', 'nan')."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [json_safe(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    return value


class OutputWriter:
    """
    Écrit les fichiers d'une exécution dans un dossier, dans l'ordre des appels.

    Chaque fichier porte l'empreinte de la configuration ; l'horodatage est omis
    en mode reproductible.
    """

    def __init__(self, directory, config_hash, kind, reproducible=False):
        self.directory = Path(directory)
        self.config_hash = config_hash
        self.kind = kind
        self.reproducible = reproducible
        self.written = []
        self.generated_at = None if reproducible else timezone.now().isoformat()

    def _path(self, name):
        self.directory.mkdir(parents=True, exist_ok=True)
        return self.directory / name

    def header_lines(self):
        lines = [f"# config_hash={self.config_hash}", f"# kind={self.kind}"]
        if self.generated_at:
            lines.append(f"# generated_at={self.generated_at}")
        return lines

    def write_csv(self, name, fieldnames, rows):
        """
        Écrit des lignes (dictionnaires) en CSV : séparateur ',', décimale '.', fin de ligne '\\n'.

        Returns:
            str: Chemin du fichier écrit
        """
        path = self._path(name)
        with path.open('w', encoding='utf-8', newline='') as f:
            for line in self.header_lines():
                f.write(line + '\n')
            writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction='ignore', lineterminator='\n')
            writer.writeheader()
            for row in rows:
                writer.writerow({
                    key: value if isinstance(value, str) else format_float(value, self.reproducible)
                    for key, value in row.items()
                })
        self.written.append(str(path))
        logger.info(f"Fichier écrit : {path}")
        return str(path)

    def write_json(self, name, payload):
        """Écrit un objet JSON indenté, précédé des champs config_hash, kind et generated_at."""
        document = {'config_hash': self.config_hash, 'kind': self.kind}
        if self.generated_at:
            document['generated_at'] = self.generated_at
        document.update(json_safe(payload))
        path = self._path(name)
        path.write_text(json.dumps(document, ensure_ascii=False, indent=2) + '\n', encoding='utf-8')
        self.written.append(str(path))
        logger.info(f"Fichier écrit : {path}")
        return str(path)

    def write_table(self, name, output_format, fieldnames, rows, metadata=None):
        """Table au format demandé : CSV, ou JSON {metadata…, rows: [...]}."""
        rows = list(rows)
        if output_format == 'json':
            payload = dict(metadata or {})
            payload['rows'] = [{key: row.get(key) for key in fieldnames} for row in rows]
            return self.write_json(f"{name}.json", payload)
        return self.write_csv(f"{name}.csv", fieldnames, rows)

# common/exceptions.py
# Exceptions du laboratoire, chacune associée à un code de sortie de la CLI


class AirdropLabError(Exception):
    """
    Erreur de base du laboratoire.

    Attributes:
        message (str): Message lisible
        field (str): Chemin pointé du champ de configuration en cause (optionnel)
    """
    exit_code = 1

    def __init__(self, message, field=None):
        super().__init__(message)
        self.message = message
        self.field = field

    def __str__(self):
        if self.field:
            return f"{self.field}: {self.message}"
        return self.message


class ConfigParseError(AirdropLabError):
    """Fichier de configuration illisible ou JSON invalide."""
    exit_code = 2


class SchemaError(AirdropLabError):
    """Champ manquant, type incorrect ou valeur hors énumération."""
    exit_code = 3


class InvalidConfigError(AirdropLabError):
    """Configuration bien formée mais violant un invariant du modèle."""
    exit_code = 4


class UnsupportedCombinationError(AirdropLabError):
    """Opération demandée sur une configuration qu'elle ne couvre pas."""
    exit_code = 5


class ResourceLimitError(AirdropLabError):
    """Espace de profils ou durée de calcul au-delà des plafonds configurés."""
    exit_code = 6

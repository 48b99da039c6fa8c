# experiments/serializers.py
# Validation du document d'expérience : champs du jeu, bloc experiment et bloc output

import numpy as np
from django.utils.translation import gettext_lazy as _
from rest_framework import serializers

from games.serializers import GameConfigSerializer

EXPERIMENT_KINDS = ('equilibria', 'stationary', 'simulate', 'hitting', 'phase', 'profit', 'times')

STOCHASTIC_KINDS = ('simulate', 'hitting')

# Paramètres sans lesquels un type d'expérience ne peut pas s'exécuter
REQUIRED_PARAMS = {
    'simulate': ('seeds', 'steps'),
    'hitting': ('seeds', 'trials', 'targets'),
    'phase': ('rho_grid',),
}

OUTPUT_FORMATS = ('csv', 'json')

# 2^64 − 1
MAX_SEED = 18446744073709551615


class GridField(serializers.Field):
    """
    Grille de réels : liste explicite ou {"start", "stop", "num"} (points régulièrement espacés).

    Une grille vide viole un invariant ; une grille mal formée est une erreur de schéma.
    """
    default_error_messages = {
        'invalid': _('Une liste de réels ou un objet {start, stop, num} est attendu.'),
        'empty': _('La grille ne peut pas être vide.'),
        'min_value': _('num doit être au moins 1.'),
    }

    def to_internal_value(self, data):
        if isinstance(data, dict):
            start, stop, num = data.get('start'), data.get('stop'), data.get('num')
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (start, stop)):
                self.fail('invalid')
            if not isinstance(num, int) or isinstance(num, bool):
                self.fail('invalid')
            if num < 1:
                self.fail('min_value')
            return [float(v) for v in np.linspace(float(start), float(stop), num)]
        if not isinstance(data, list):
            self.fail('invalid')
        if not data:
            self.fail('empty')
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in data):
            self.fail('invalid')
        return [float(v) for v in data]

    def to_representation(self, value):
        return value


class ExperimentParamsSerializer(serializers.Serializer):
    """
    Bloc experiment : type d'expérience et paramètres associés.

    Les graines sont obligatoires pour les types stochastiques (simulate, hitting) ;
    --seed les remplace par une graine unique.
    """
    kind = serializers.ChoiceField(choices=EXPERIMENT_KINDS)
    seeds = serializers.ListField(
        child=serializers.IntegerField(min_value=0, max_value=MAX_SEED), required=False, allow_empty=False
    )
    trials = serializers.IntegerField(min_value=1, required=False)
    steps = serializers.IntegerField(min_value=1, required=False)
    stride = serializers.IntegerField(min_value=1, default=1)
    burn_in = serializers.IntegerField(min_value=0, default=0)
    targets = serializers.ListField(child=serializers.FloatField(min_value=0), required=False, allow_empty=False)
    tau = serializers.FloatField(min_value=0, required=False)
    cap = serializers.IntegerField(min_value=1, required=False)
    interval = serializers.ListField(
        child=serializers.IntegerField(min_value=0), min_length=2, max_length=2, required=False
    )
    method = serializers.ChoiceField(choices=('auto', 'anonymous', 'brute-force'), default='auto')
    epsilon = serializers.FloatField(min_value=0, required=False)
    mixing_epsilon = serializers.FloatField(min_value=0, max_value=1, default=0.25)
    exact_mixing = serializers.BooleanField(default=False)
    rho_grid = GridField(required=False)
    beta_grid = GridField(required=False)
    alpha_grid = GridField(required=False)

    def validate_rho_grid(self, value):
        if any(not 0.0 <= rho <= 1.0 for rho in value):
            raise serializers.ValidationError(_('Les valeurs de ρ doivent appartenir à [0, 1].'), code='invariant')
        return value

    def validate_beta_grid(self, value):
        if any(beta < 0 for beta in value):
            raise serializers.ValidationError(_('β doit être positif ou nul.'), code='min_value')
        return value

    def validate_alpha_grid(self, value):
        if any(alpha < 0 for alpha in value):
            raise serializers.ValidationError(_('Les coûts doivent être positifs ou nuls.'), code='min_value')
        return value

    def validate(self, data):
        missing = {
            name: _('Requis pour une expérience de type {kind}.').format(kind=data['kind'])
            for name in REQUIRED_PARAMS.get(data['kind'], ())
            if name not in data
        }
        if missing:
            raise serializers.ValidationError(missing, code='invariant')
        interval = data.get('interval')
        if interval and interval[0] >= interval[1]:
            raise serializers.ValidationError({'interval': _('ℓ1 < ℓ2 requis.')}, code='invariant')
        return data


class OutputSerializer(serializers.Serializer):
    dir = serializers.CharField(default='out')
    format = serializers.ChoiceField(choices=OUTPUT_FORMATS, default='csv')


class ExperimentDocumentSerializer(GameConfigSerializer):
    """Document complet : champs du jeu au premier niveau, blocs experiment et output."""
    experiment = ExperimentParamsSerializer()
    output = OutputSerializer(required=False)

    def experiment_params(self):
        """Paramètres validés sans le type, prêts à être hachés (JSON pur)."""
        params = dict(self.validated_data['experiment'])
        params.pop('kind')
        return params

    def output_options(self):
        output = self.validated_data.get('output') or {}
        return output.get('dir', 'out'), output.get('format', 'csv')

# games/serializers.py
# Validation du document JSON décrivant un jeu (GameConfig et TechnologySpec)

from django.utils.translation import gettext_lazy as _
from rest_framework import serializers

from common.utils import lab_setting
from .domain import GameConfig
from .technologies import TECHNOLOGY_KINDS, TechnologySpec


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class CostsField(serializers.Field):
    """Coût uniforme α (un réel) ou liste des coûts c_i."""
    default_error_messages = {
        'invalid': _('Un réel ou une liste de réels est attendu.'),
        'min_value': _('Les coûts doivent être positifs ou nuls.'),
    }

    def to_internal_value(self, data):
        if _is_number(data):
            values = [data]
        elif isinstance(data, list) and data and all(_is_number(c) for c in data):
            values = data
        else:
            self.fail('invalid')
        if any(c < 0 for c in values):
            self.fail('min_value')
        if _is_number(data):
            return float(data)
        return [float(c) for c in data]

    def to_representation(self, value):
        return value


class ActionsField(serializers.Field):
    """Ensemble d'actions partagé (liste de réels) ou un ensemble par joueur."""
    default_error_messages = {
        'invalid': _('Une liste de réels ou une liste de listes de réels est attendue.'),
    }

    def to_internal_value(self, data):
        if not isinstance(data, list) or not data:
            self.fail('invalid')
        if all(_is_number(a) for a in data):
            return [float(a) for a in data]
        if all(isinstance(s, list) and s and all(_is_number(a) for a in s) for s in data):
            return [[float(a) for a in s] for s in data]
        self.fail('invalid')

    def to_representation(self, value):
        return value


class ThresholdParamsSerializer(serializers.Serializer):
    tau = serializers.IntegerField(min_value=1)
    v_low = serializers.FloatField(min_value=0, default=0.0)
    v_high = serializers.FloatField()

    def validate_tau(self, value):
        n = self.context.get('n')
        if n is not None and value > n:
            raise serializers.ValidationError(_('τ ne peut pas dépasser n.'), code='max_value')
        return value

    def validate(self, data):
        if data['v_high'] <= data['v_low']:
            raise serializers.ValidationError(
                {'v_high': _('V_high doit être strictement supérieur à V_low.')}, code='invariant'
            )
        return data


class LinearParamsSerializer(serializers.Serializer):
    lambda_v = serializers.FloatField()

    def validate_lambda_v(self, value):
        if value <= 0:
            raise serializers.ValidationError(_('λ_V doit être strictement positif.'), code='invariant')
        return value


class QuadraticParamsSerializer(serializers.Serializer):
    tau = serializers.FloatField()

    def validate_tau(self, value):
        if value <= 0:
            raise serializers.ValidationError(_('τ doit être strictement positif.'), code='invariant')
        return value


class SShapedParamsSerializer(QuadraticParamsSerializer):
    c = serializers.FloatField()

    def validate_c(self, value):
        if value <= 0:
            raise serializers.ValidationError(_('c doit être strictement positif.'), code='invariant')
        return value


class ConcaveParamsSerializer(QuadraticParamsSerializer):
    c = serializers.FloatField()

    def validate_c(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError(_('c doit appartenir à ]0, 1[.'), code='invariant')
        return value


class TableParamsSerializer(serializers.Serializer):
    values = serializers.ListField(child=serializers.FloatField(), allow_empty=False)

    def validate_values(self, value):
        n = self.context.get('n')
        if n is not None and len(value) != n + 1:
            raise serializers.ValidationError(_('La table doit contenir n+1 valeurs.'), code='invariant')
        if any(b < a for a, b in zip(value, value[1:])):
            raise serializers.ValidationError(_('La table doit être croissante (au sens large).'), code='invariant')
        return value


class GeneralParamsSerializer(serializers.Serializer):
    """values : liste de paires [profil, valeur]."""
    values = serializers.ListField(child=serializers.ListField(), allow_empty=False)

    def validate_values(self, value):
        mapping = {}
        for pair in value:
            if len(pair) != 2 or not isinstance(pair[0], list) or not _is_number(pair[1]):
                raise serializers.ValidationError(_('Chaque entrée doit être une paire [profil, valeur].'), code='invalid')
            if not all(_is_number(a) for a in pair[0]):
                raise serializers.ValidationError(_('Un profil doit être une liste de réels.'), code='invalid')
            key = tuple(float(a) for a in pair[0])
            if key in mapping:
                raise serializers.ValidationError(_('Profil présent plusieurs fois.'), code='invariant')
            mapping[key] = float(pair[1])
        return mapping


PARAMS_SERIALIZERS = {
    'threshold': ThresholdParamsSerializer,
    'linear': LinearParamsSerializer,
    'quadratic': QuadraticParamsSerializer,
    'sshaped': SShapedParamsSerializer,
    'concave': ConcaveParamsSerializer,
    'table': TableParamsSerializer,
    'general': GeneralParamsSerializer,
}


class TechnologySpecSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=TECHNOLOGY_KINDS)
    params = serializers.DictField()

    def validate(self, data):
        params_serializer = PARAMS_SERIALIZERS[data['kind']](data=data['params'], context=self.context)
        if not params_serializer.is_valid():
            raise serializers.ValidationError({'params': params_serializer.errors})
        return {'kind': data['kind'], 'params': dict(params_serializer.validated_data)}


class GameConfigSerializer(serializers.Serializer):
    """
    Champs du jeu, au premier niveau du document d'expérience.

    Les contrôles de type relèvent du schéma ; les bornes et relations entre
    champs sont des invariants (codes min_value, max_value, invariant).
    """
    n = serializers.IntegerField(min_value=1)
    costs = CostsField()
    rho = serializers.FloatField(min_value=0, max_value=1)
    t_tot = serializers.FloatField()
    beta = serializers.FloatField(min_value=0, required=False)
    d_v = serializers.FloatField(min_value=0, default=0.0)
    actions = ActionsField(required=False)
    technology = TechnologySpecSerializer()

    def to_internal_value(self, data):
        if isinstance(data, dict) and isinstance(data.get('n'), int):
            self.context['n'] = data['n']
        return super().to_internal_value(data)

    def validate_t_tot(self, value):
        if value <= 0:
            raise serializers.ValidationError(_('T_tot doit être strictement positif.'), code='invariant')
        return value

    def validate(self, data):
        costs = data['costs']
        if isinstance(costs, list) and len(costs) != data['n']:
            raise serializers.ValidationError({'costs': _('Il faut exactement n coûts.')}, code='invariant')
        actions = data.get('actions')
        if actions and isinstance(actions[0], list) and len(actions) != data['n']:
            raise serializers.ValidationError({'actions': _('Il faut exactement n ensembles d\'actions.')}, code='invariant')
        if 'beta' not in data:
            data['beta'] = lab_setting('DEFAULT_BETA')
        return data

    def to_game_config(self):
        """Construit la GameConfig immuable à partir des données validées."""
        data = self.validated_data
        technology = data['technology']
        return GameConfig.build(
            n=data['n'],
            costs=data['costs'],
            rho=data['rho'],
            t_tot=data['t_tot'],
            beta=data['beta'],
            technology=TechnologySpec(kind=technology['kind'], params=technology['params']),
            actions=data.get('actions'),
            d_v=data['d_v'],
        )

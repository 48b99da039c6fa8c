# equilibria/serializers.py
# Sérialisation JSON des rapports d'équilibres et des régimes du concepteur

from rest_framework import serializers


class LevelClassSerializer(serializers.Serializer):
    ell = serializers.IntegerField()
    count = serializers.IntegerField()
    witness = serializers.ListField(child=serializers.FloatField())


class EquilibriumReportSerializer(serializers.Serializer):
    method = serializers.CharField()
    pne = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    pne_levels = LevelClassSerializer(many=True)
    pne_count = serializers.IntegerField()
    potmax = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()))
    potmax_levels = LevelClassSerializer(many=True)
    potmax_count = serializers.IntegerField()
    max_potential = serializers.FloatField(allow_null=True)
    consistent = serializers.BooleanField()
    limit_distribution = serializers.SerializerMethodField()

    def get_limit_distribution(self, report):
        if report.method == 'anonymous':
            return [{'ell': ell, 'probability': p} for ell, p in sorted(report.limit_distribution.items())]
        return [{'profile': list(profile), 'probability': p} for profile, p in report.limit_distribution.items()]


class DesignerRegimeSerializer(serializers.Serializer):
    regime = serializers.CharField()
    rho_c = serializers.FloatField()
    recommended_rho = serializers.FloatField()
    guaranteed_profit = serializers.FloatField()
    epsilon = serializers.FloatField()
    alpha_n_tau = serializers.FloatField()
    delta_v = serializers.FloatField()
    intermediate_cut = serializers.FloatField()
    boundary = serializers.BooleanField()


class LinearOptimumSerializer(serializers.Serializer):
    rho_star = serializers.FloatField()
    ell_star = serializers.IntegerField()
    profit = serializers.FloatField()
    contributors = serializers.ListField(child=serializers.IntegerField())


class LinearEquilibriumValueSerializer(serializers.Serializer):
    value = serializers.FloatField()
    critical_rho = serializers.FloatField()
    levels = serializers.ListField(child=serializers.IntegerField())
    boundary = serializers.BooleanField()


class QuadraticRegimeSerializer(serializers.Serializer):
    region = serializers.IntegerField()
    description = serializers.CharField()
    lower_alpha = serializers.FloatField()
    upper_alpha = serializers.FloatField()
    boundary = serializers.BooleanField()
    rho = serializers.FloatField(allow_null=True)
    bad_pne = serializers.BooleanField(allow_null=True)
    good_pne = serializers.BooleanField(allow_null=True)
    selected = serializers.CharField(allow_null=True)

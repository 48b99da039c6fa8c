# designer/serializers.py
# Sérialisation des courbes de profit et de l'airdrop optimal

from rest_framework import serializers


class ProfitPointSerializer(serializers.Serializer):
    rho = serializers.FloatField()
    p_high = serializers.FloatField(allow_null=True)
    value = serializers.FloatField()
    profit = serializers.FloatField()


class ProfitCurveSerializer(serializers.Serializer):
    rho_star = serializers.FloatField()
    profit_star = serializers.FloatField()
    d_v = serializers.FloatField()
    closed_form = serializers.BooleanField()
    b = serializers.FloatField(allow_null=True)
    c = serializers.FloatField(allow_null=True)
    rho_bar = serializers.FloatField(allow_null=True)
    max_relative_gap = serializers.FloatField(allow_null=True)
    points = ProfitPointSerializer(many=True)


class OptimalAirdropSerializer(serializers.Serializer):
    rho_star = serializers.FloatField()
    profit_star = serializers.FloatField()
    regime = serializers.CharField()
    closed_form_applies = serializers.BooleanField()
    b = serializers.FloatField()
    c = serializers.FloatField()
    rho_bar = serializers.FloatField(allow_null=True)
    p_high_zero = serializers.FloatField()
    p_high_star = serializers.FloatField()
    p_high_bar = serializers.FloatField(allow_null=True)
    derivative_at_zero = serializers.FloatField(allow_null=True)
    grid_best_rho = serializers.FloatField()
    grid_best_profit = serializers.FloatField()

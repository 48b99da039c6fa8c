# chains/serializers.py
# Sérialisation des lois stationnaires, temps d'atteinte et bornes

from rest_framework import serializers


class StationaryLawSerializer(serializers.Serializer):
    n = serializers.IntegerField()
    mean_level = serializers.FloatField()
    expected_value = serializers.FloatField()
    tau = serializers.IntegerField(allow_null=True)
    p_high = serializers.FloatField(allow_null=True)
    rows = serializers.SerializerMethodField()

    def get_rows(self, law):
        return [
            {'ell': ell, 'log_weight': float(log_weight), 'prob': float(prob)}
            for ell, (log_weight, prob) in enumerate(zip(law.log_weights, law.probs))
        ]


class SuccessProbabilitySerializer(serializers.Serializer):
    rho = serializers.FloatField()
    p_high = serializers.FloatField()
    b = serializers.FloatField()
    c = serializers.FloatField()
    log_c = serializers.FloatField()


class HittingTimeSerializer(serializers.Serializer):
    start = serializers.IntegerField()
    target = serializers.IntegerField()
    value = serializers.FloatField()
    log_value = serializers.FloatField()
    finite = serializers.BooleanField()


class CutoffReportSerializer(serializers.Serializer):
    ell0 = serializers.IntegerField()
    t_cutoff = serializers.FloatField()
    left_sum = serializers.FloatField()
    right_sum = serializers.FloatField()
    mix_lower = serializers.FloatField()
    mix_upper = serializers.FloatField()


class MixingLowerBoundSerializer(serializers.Serializer):
    applicable = serializers.BooleanField()
    p_high = serializers.FloatField()
    derived_form = serializers.FloatField(allow_null=True)
    reduced_form = serializers.FloatField(allow_null=True)


class HittingLowerBoundSerializer(serializers.Serializer):
    interval = serializers.ListField(child=serializers.IntegerField())
    target = serializers.IntegerField()
    drift_form = serializers.FloatField()
    steep_form = serializers.FloatField()
    threshold_form = serializers.FloatField(allow_null=True)
    threshold_best = serializers.FloatField(allow_null=True)
    threshold_stated_form = serializers.FloatField(allow_null=True)
    ell_star_form = serializers.FloatField(allow_null=True)
    linear_form = serializers.FloatField(allow_null=True)
    best = serializers.FloatField()

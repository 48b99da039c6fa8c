# dynamics/serializers.py
# Sérialisation des estimations Monte-Carlo

from rest_framework import serializers


class HittingEstimateSerializer(serializers.Serializer):
    target = serializers.FloatField()
    trials = serializers.IntegerField()
    successes = serializers.IntegerField()
    censored = serializers.IntegerField()
    cap = serializers.IntegerField()
    mean = serializers.FloatField(allow_null=True)
    std_error = serializers.FloatField(allow_null=True)
    ci_low = serializers.FloatField(allow_null=True)
    ci_high = serializers.FloatField(allow_null=True)
    censored_mean = serializers.FloatField()


class EmpiricalDistributionSerializer(serializers.Serializer):
    samples = serializers.IntegerField()
    burn_in = serializers.IntegerField()
    tv_distance = serializers.FloatField()
    rows = serializers.SerializerMethodField()

    def get_rows(self, distribution):
        return list(distribution.rows())


class SweepResultSerializer(serializers.Serializer):
    parameter = serializers.CharField()
    value = serializers.FloatField()
    trials = serializers.IntegerField()
    successes = serializers.IntegerField(allow_null=True)
    mean_hitting = serializers.FloatField(allow_null=True)
    std_error = serializers.FloatField(allow_null=True)
    exact_hitting = serializers.FloatField(allow_null=True)
    occupancy = serializers.FloatField(allow_null=True)
    p_high = serializers.FloatField(allow_null=True)

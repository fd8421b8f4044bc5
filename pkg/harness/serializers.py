import math

import numpy as np
from rest_framework import serializers

from problem.instance import ChannelSet

INF_TOKEN = 'inf'


def finite_or_inf(value):
    """Floats pass through; +∞ becomes the literal string 'inf'."""
    value = float(value)
    if math.isinf(value):
        return INF_TOKEN if value > 0 else f'-{INF_TOKEN}'
    return value


class ComplexPairField(serializers.ListField):
    """A complex number written as [re, im]."""

    child = serializers.FloatField()

    def __init__(self, **kwargs):
        kwargs.setdefault('min_length', 2)
        kwargs.setdefault('max_length', 2)
        super().__init__(**kwargs)


class ChannelFileSerializer(serializers.Serializer):
    """
    Channel file: {"N", "K", "sigma2", "channels": [[[re, im] x N] x K]}.

    `save()` returns a ChannelSet; serializing a ChannelSet produces the file payload.
    """

    N = serializers.IntegerField(min_value=1)
    K = serializers.IntegerField(min_value=1)
    sigma2 = serializers.FloatField(default=1.0)
    channels = serializers.ListField(child=serializers.ListField(child=ComplexPairField(), min_length=1), min_length=1)

    def validate_sigma2(self, value):
        if not value > 0 or not math.isfinite(value):
            raise serializers.ValidationError('sigma2 must be a positive finite number.')
        return value

    def validate(self, attrs):
        rows = attrs['channels']
        if len(rows) != attrs['K']:
            raise serializers.ValidationError(f"Expected {attrs['K']} channel rows, got {len(rows)}.")
        if any(len(row) != attrs['N'] for row in rows):
            raise serializers.ValidationError(f"Every channel row needs exactly {attrs['N']} entries.")
        values = np.asarray(rows, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise serializers.ValidationError('Channel entries must be finite.')
        return attrs

    def create(self, validated_data):
        values = np.asarray(validated_data['channels'], dtype=np.float64)
        return ChannelSet(values[..., 0] + 1j * values[..., 1], validated_data['sigma2'])

    def to_representation(self, instance):
        if isinstance(instance, ChannelSet):
            return {
                'N': instance.N,
                'K': instance.K,
                'sigma2': instance.sigma2,
                'channels': [[[float(z.real), float(z.imag)] for z in row] for row in instance.h],
            }
        return super().to_representation(instance)


class SolutionSerializer(serializers.BaseSerializer):
    """Read-only view of a Solution for JSON files and API responses."""

    def to_representation(self, solution):
        return {
            'solver': solution.solver,
            'constraint': solution.constraint.tag if solution.constraint else None,
            'status': solution.status,
            'phases': [float(t) for t in solution.beamformer.theta],
            'weights': [[float(z.real), float(z.imag)] for z in solution.beamformer.w],
            'objective': finite_or_inf(solution.objective),
            'powers': [float(p) for p in solution.powers],
            'snr_floor': float(solution.snr_floor),
            'lower_bound': finite_or_inf(solution.certificate.global_lower_bound),
            'gap': finite_or_inf(solution.certificate.gap),
            'nodes_explored': int(solution.certificate.nodes_explored),
        }

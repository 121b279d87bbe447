from rest_framework import serializers

from core.exceptions import ZRPError

from .ladder import environment_from_string, generate_environment, require_valid
from .models import EnvironmentRecord


class EnvironmentRecordSerializer(serializers.ModelSerializer):
    """
    Serializer for stored environments (derived fields are read-only).
    """
    class Meta:
        model = EnvironmentRecord
        fields = [
            'id', 'figures', 'n', 'pair_prob', 'seed', 'digest',
            'tile_count', 'kappa_n', 'created_at'
        ]
        read_only_fields = fields


class EnvironmentCreateSerializer(serializers.Serializer):
    """
    Either generate an environment from (n, p, seed) or store an explicit
    figure string.
    """
    n = serializers.IntegerField(required=False, min_value=2)
    p = serializers.FloatField(required=False, min_value=0.0)
    seed = serializers.IntegerField(required=False, default=0, min_value=0)
    figures = serializers.CharField(required=False, allow_blank=False)

    def validate(self, data):
        figures = data.get('figures')
        try:
            if figures:
                env = require_valid(environment_from_string(figures, seed=data['seed']))
            elif 'n' in data and 'p' in data:
                env = generate_environment(data['n'], data['p'], data['seed'])
            else:
                raise serializers.ValidationError('Provide either figures or both n and p')
        except ZRPError as exc:
            raise serializers.ValidationError(str(exc)) from exc
        data['environment'] = env
        return data

    def create(self, validated_data):
        record = EnvironmentRecord.from_environment(validated_data['environment'])
        if record.pk is None:
            record.save()
        return record


class TileSerializer(serializers.Serializer):
    index = serializers.IntegerField()
    centre_site = serializers.IntegerField()
    size = serializers.IntegerField()
    vertices = serializers.SerializerMethodField()

    def get_vertices(self, tile):
        return sorted([v.site, v.row] for v in tile.vertices)

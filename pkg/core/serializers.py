from rest_framework import serializers

from .models import ExperimentRun


class ExperimentRunListSerializer(serializers.ModelSerializer):
    """
    Compact listing of recorded runs (no report body).
    """
    class Meta:
        model = ExperimentRun
        fields = ['id', 'kind', 'status', 'environment_digest', 'master_seed', 'created_at']
        read_only_fields = fields


class ExperimentRunSerializer(serializers.ModelSerializer):
    """
    Serializer for a recorded run with its config and full report.
    """
    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'kind', 'status', 'environment_digest', 'master_seed',
            'config', 'report', 'created_at'
        ]
        read_only_fields = fields

from django.contrib import admin
from import_export import resources
from import_export.admin import ExportMixin

from .models import ExperimentRun


class ExperimentRunResource(resources.ModelResource):
    class Meta:
        model = ExperimentRun
        fields = ('id', 'kind', 'status', 'environment_digest', 'master_seed', 'created_at')
        export_order = fields


@admin.register(ExperimentRun)
class ExperimentRunAdmin(ExportMixin, admin.ModelAdmin):
    """
    Admin configuration for recorded runs with CSV export.
    Runs are written by the commands, so every field is read-only here.
    """
    resource_classes = [ExperimentRunResource]
    list_display = ('kind', 'status', 'digest_short', 'master_seed', 'created_at')
    list_filter = ('kind', 'status', 'created_at')
    search_fields = ('kind', 'environment_digest')
    readonly_fields = ('kind', 'status', 'environment_digest', 'master_seed', 'config', 'report', 'created_at')

    def digest_short(self, obj):
        return obj.environment_digest[:12]
    digest_short.short_description = 'Environment'

    def has_add_permission(self, request):
        return False

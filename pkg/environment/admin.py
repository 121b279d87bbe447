from django.contrib import admin
from import_export import resources
from import_export.admin import ExportMixin

from .models import EnvironmentRecord


class EnvironmentRecordResource(resources.ModelResource):
    class Meta:
        model = EnvironmentRecord
        fields = ('id', 'n', 'pair_prob', 'seed', 'digest', 'tile_count', 'kappa_n', 'created_at')
        export_order = fields


@admin.register(EnvironmentRecord)
class EnvironmentRecordAdmin(ExportMixin, admin.ModelAdmin):
    """
    Admin configuration for stored environments with CSV export.
    """
    resource_classes = [EnvironmentRecordResource]
    list_display = ('digest_short', 'n', 'pair_prob', 'seed', 'tile_count', 'kappa_n', 'created_at')
    list_filter = ('created_at',)
    search_fields = ('digest', 'figures')
    readonly_fields = ('digest', 'tile_count', 'kappa_n', 'created_at')

    def digest_short(self, obj):
        return obj.digest[:12]
    digest_short.short_description = 'Digest'

import json

from django.db import models

from .reports import report_json


class ExperimentRun(models.Model):
    """
    One finished experiment: the config it ran with and the report it produced.
    Both are stored as the JSON the pipelines write to disk.
    """
    STATUS_SUCCEEDED = 'succeeded'
    STATUS_FAILED = 'failed'
    STATUS_CHOICES = [
        (STATUS_SUCCEEDED, 'Succeeded'),
        (STATUS_FAILED, 'Failed'),
    ]

    kind = models.CharField(
        max_length=32,
        verbose_name="Experiment kind",
        help_text="Pipeline or command that produced the report"
    )
    config = models.JSONField(
        default=dict,
        blank=True,
        verbose_name="Config",
        help_text="Experiment configuration the run was started with"
    )
    report = models.JSONField(
        default=dict,
        verbose_name="Report",
        help_text="Machine-readable report produced by the run"
    )
    environment_digest = models.CharField(
        max_length=64,
        blank=True,
        verbose_name="Environment digest",
        help_text="sha256 of the environment's figure string, empty when no environment was involved"
    )
    master_seed = models.BigIntegerField(
        null=True,
        blank=True,
        verbose_name="Master seed",
        help_text="Seed the replica streams were derived from"
    )
    status = models.CharField(
        max_length=16,
        choices=STATUS_CHOICES,
        default=STATUS_SUCCEEDED,
        verbose_name="Status",
        help_text="Whether the run certified what it set out to check"
    )
    created_at = models.DateTimeField(
        auto_now_add=True,
        verbose_name="Created At",
        help_text="The date and time when the run was recorded"
    )

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['kind']),
            models.Index(fields=['-created_at']),
        ]

    @staticmethod
    def status_of(report):
        if report.get('status') == 'failed' or report.get('passed') is False:
            return ExperimentRun.STATUS_FAILED
        return ExperimentRun.STATUS_SUCCEEDED

    @classmethod
    def from_report(cls, kind, report, config=None):
        """Store a report; numpy values and infinities go through the report encoder first."""
        report = json.loads(report_json(report))
        if config is None:
            config = report.get('config', {})
        elif hasattr(config, 'to_dict'):
            config = config.to_dict()
        config = json.loads(report_json(config))
        master_seed = config.get('master_seed', report.get('master_seed'))
        return cls.objects.create(
            kind=kind,
            config=config,
            report=report,
            environment_digest=report.get('environment_digest', ''),
            master_seed=master_seed,
            status=cls.status_of(report),
        )

    def __str__(self):
        return f"{self.kind} #{self.pk} ({self.status})"

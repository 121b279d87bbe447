# Generated by Django 5.2.7 on 2026-10-19 09:14

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('kind', models.CharField(help_text='Pipeline or command that produced the report', max_length=32, verbose_name='Experiment kind')),
                ('config', models.JSONField(blank=True, default=dict, help_text='Experiment configuration the run was started with', verbose_name='Config')),
                ('report', models.JSONField(default=dict, help_text='Machine-readable report produced by the run', verbose_name='Report')),
                ('environment_digest', models.CharField(blank=True, help_text="sha256 of the environment's figure string, empty when no environment was involved", max_length=64, verbose_name='Environment digest')),
                ('master_seed', models.BigIntegerField(blank=True, help_text='Seed the replica streams were derived from', null=True, verbose_name='Master seed')),
                ('status', models.CharField(choices=[('succeeded', 'Succeeded'), ('failed', 'Failed')], default='succeeded', help_text='Whether the run certified what it set out to check', max_length=16, verbose_name='Status')),
                ('created_at', models.DateTimeField(auto_now_add=True, help_text='The date and time when the run was recorded', verbose_name='Created At')),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['kind'], name='core_experi_kind_3b8e0c_idx'), models.Index(fields=['-created_at'], name='core_experi_created_7a1d52_idx')],
            },
        ),
    ]
